//! Exact arithmetic for GF(p^m), additive characters, and trace/subfield machinery.
//!
//! Elements are stored as indices in `[0, p^m)`; the base-p digits of an index
//! are the coordinates in the polynomial basis `1, X, ..., X^{m-1}` modulo a
//! deterministically chosen irreducible polynomial. All arithmetic is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::sync::OnceLock;
use thiserror::Error;

/// Largest supported field size. Anything beyond this is a non-goal.
pub const MAX_FIELD_SIZE: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("no irreducible modulus of degree {0} found (should be impossible)")]
    NoIrreducibleFound(usize),
    #[error("field size {0} exceeds supported maximum {MAX_FIELD_SIZE}")]
    TooLarge(u64),
    #[error("extension degree must be >= 1")]
    BadDegree,
    #[error("{0} does not divide the extension degree {1}")]
    NotADivisor(usize, usize),
    #[error("vector lengths differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("bad field descriptor: {0}")]
    BadDescriptor(String),
}

/// Serializable field descriptor: `{"p":2,"m":2,"modulus":[1,1,1]}`,
/// modulus coefficients listed low-to-high.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub m: usize,
    pub modulus: Vec<u64>,
}

/// A field element, stored as its index in `[0, p^m)`.
///
/// The base-p digits of the index are the polynomial-basis coordinates
/// (constant term least significant). Equality of indices is equality of
/// coordinate vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct MulTables {
    /// exp[i] = g^i for a fixed primitive element g, i in [0, q-1).
    exp: Vec<u32>,
    /// log[x] = i with exp[i] = x, for x != 0. log[0] unused.
    log: Vec<u32>,
}

/// GF(p^m) with exact arithmetic on `Fe` indices.
pub struct Field {
    spec: FieldSpec,
    q: u64,
    /// p^i for i in 0..=m.
    pow_p: Vec<u64>,
    tables: OnceLock<MulTables>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({}^{})", self.spec.p, self.spec.m)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense polynomials over GF(p), coefficients low-to-high, no trailing zeros.
mod gfp_poly {
    pub fn trim(c: &mut Vec<u64>) {
        while c.last() == Some(&0) {
            c.pop();
        }
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        assert!(!b.is_empty());
        let mut r: Vec<u64> = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead_inv = mod_inv(b[db], p);
        while r.len() > db {
            let dr = r.len() - 1;
            let factor = (r[dr] * lead_inv) % p;
            for i in 0..=db {
                let idx = dr - db + i;
                r[idx] = (r[idx] + p * p - (factor * b[i]) % p) % p;
            }
            trim(&mut r);
            if r.is_empty() {
                break;
            }
        }
        r
    }

    pub fn mod_inv(a: u64, p: u64) -> u64 {
        // p prime, a != 0 mod p
        mod_pow(a % p, p - 2, p)
    }

    pub fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    }

    /// Trial division by all monic polynomials of degree 1..=deg/2.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let deg = f.len() - 1;
        if deg == 1 {
            return true;
        }
        for d in 1..=deg / 2 {
            // enumerate monic divisor candidates of degree d
            let count = p.pow(d as u32);
            for k in 0..count {
                let mut g = Vec::with_capacity(d + 1);
                let mut kk = k;
                for _ in 0..d {
                    g.push(kk % p);
                    kk /= p;
                }
                g.push(1);
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

impl Field {
    /// Constructs GF(p^m) with the deterministically chosen modulus: the monic
    /// irreducible of degree m whose non-leading coefficient vector, read as a
    /// base-p integer (constant term least significant), is least.
    pub fn new(p: u64, m: usize) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if m < 1 {
            return Err(FieldError::BadDegree);
        }
        let mut q: u64 = 1;
        for _ in 0..m {
            q = q.checked_mul(p).ok_or(FieldError::TooLarge(u64::MAX))?;
            if q > MAX_FIELD_SIZE {
                return Err(FieldError::TooLarge(q));
            }
        }
        let modulus = if m == 1 {
            vec![0, 1] // X
        } else {
            let mut found = None;
            for k in 0..q {
                let mut f = Vec::with_capacity(m + 1);
                let mut kk = k;
                for _ in 0..m {
                    f.push(kk % p);
                    kk /= p;
                }
                f.push(1);
                if gfp_poly::is_irreducible(&f, p) {
                    found = Some(f);
                    break;
                }
            }
            found.ok_or(FieldError::NoIrreducibleFound(m))?
        };
        Ok(Field {
            spec: FieldSpec { p, m, modulus },
            q,
            pow_p: (0..=m).map(|i| p.pow(i as u32)).collect(),
            tables: OnceLock::new(),
        })
    }

    /// Reconstructs a field from its descriptor, re-verifying irreducibility.
    pub fn from_spec(spec: &FieldSpec) -> Result<Field, FieldError> {
        if !is_prime(spec.p) {
            return Err(FieldError::NonPrime(spec.p));
        }
        if spec.m < 1 || spec.modulus.len() != spec.m + 1 {
            return Err(FieldError::BadDescriptor(format!(
                "modulus length {} does not match degree {}",
                spec.modulus.len(),
                spec.m
            )));
        }
        if spec.modulus[spec.m] != 1 {
            return Err(FieldError::BadDescriptor("modulus is not monic".into()));
        }
        if spec.modulus.iter().any(|&c| c >= spec.p) {
            return Err(FieldError::BadDescriptor("coefficient out of range".into()));
        }
        if spec.m > 1 && !gfp_poly::is_irreducible(&spec.modulus, spec.p) {
            return Err(FieldError::BadDescriptor("modulus is reducible".into()));
        }
        let mut q: u64 = 1;
        for _ in 0..spec.m {
            q *= spec.p;
            if q > MAX_FIELD_SIZE {
                return Err(FieldError::TooLarge(q));
            }
        }
        Ok(Field {
            spec: spec.clone(),
            q,
            pow_p: (0..=spec.m).map(|i| spec.p.pow(i as u32)).collect(),
            tables: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn size(&self) -> u64 {
        self.q
    }

    pub fn elem(&self, idx: u64) -> Fe {
        assert!(idx < self.q, "element index {idx} out of range for {self:?}");
        Fe(idx as u32)
    }

    /// Element from an integer, reduced into the prime subfield.
    pub fn from_int(&self, n: u64) -> Fe {
        Fe((n % self.spec.p) as u32)
    }

    pub fn coords(&self, x: Fe) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.spec.m);
        let mut k = x.0 as u64;
        for _ in 0..self.spec.m {
            v.push((k % self.spec.p) as u32);
            k /= self.spec.p;
        }
        v
    }

    pub fn from_coords(&self, coords: &[u32]) -> Fe {
        assert_eq!(coords.len(), self.spec.m);
        let mut k = 0u64;
        for (i, &c) in coords.iter().enumerate() {
            assert!((c as u64) < self.spec.p);
            k += c as u64 * self.pow_p[i];
        }
        Fe(k as u32)
    }

    pub fn iter(&self) -> impl Iterator<Item = Fe> {
        (0..self.q).map(|i| Fe(i as u32))
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.spec.m == 1 {
            return Fe(((a.0 as u64 + b.0 as u64) % self.spec.p) as u32);
        }
        let p = self.spec.p;
        let (mut ka, mut kb) = (a.0 as u64, b.0 as u64);
        let mut out = 0u64;
        for pw in &self.pow_p[..self.spec.m] {
            let da = ka % p;
            let db = kb % p;
            out += ((da + db) % p) * pw;
            ka /= p;
            kb /= p;
        }
        Fe(out as u32)
    }

    pub fn neg(&self, a: Fe) -> Fe {
        if self.spec.m == 1 {
            return Fe(((self.spec.p - a.0 as u64) % self.spec.p) as u32);
        }
        let p = self.spec.p;
        let mut ka = a.0 as u64;
        let mut out = 0u64;
        for pw in &self.pow_p[..self.spec.m] {
            let da = ka % p;
            out += ((p - da) % p) * pw;
            ka /= p;
        }
        Fe(out as u32)
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    fn mul_tables(&self) -> &MulTables {
        self.tables.get_or_init(|| {
            let q = self.q as usize;
            // find a primitive element by direct order computation
            let mut g = Fe(0);
            'search: for cand in 1..q as u64 {
                let c = Fe(cand as u32);
                let mut x = c;
                for ord in 1..q as u64 {
                    if x == Fe::ONE {
                        if ord == self.q - 1 {
                            g = c;
                            break 'search;
                        }
                        continue 'search;
                    }
                    x = self.mul_raw(x, c);
                }
            }
            assert!(g != Fe(0), "no primitive element found");
            let mut exp = Vec::with_capacity(q - 1);
            let mut log = vec![0u32; q];
            let mut x = Fe::ONE;
            for i in 0..q as u64 - 1 {
                exp.push(x.0);
                log[x.0 as usize] = i as u32;
                x = self.mul_raw(x, g);
            }
            MulTables { exp, log }
        })
    }

    /// Polynomial-basis multiplication, no tables.
    fn mul_raw(&self, a: Fe, b: Fe) -> Fe {
        let p = self.spec.p;
        let m = self.spec.m;
        if m == 1 {
            return Fe(((a.0 as u64 * b.0 as u64) % p) as u32);
        }
        let ca = self.coords(a);
        let cb = self.coords(b);
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // reduce modulo the defining polynomial
        for d in (m..2 * m - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..m {
                let sub = (c * self.spec.modulus[i]) % p;
                prod[d - m + i] = (prod[d - m + i] + p - sub) % p;
            }
        }
        let mut out = 0u64;
        for i in 0..m {
            out += prod[i] * self.pow_p[i];
        }
        Fe(out as u32)
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        if self.spec.m == 1 {
            return Fe(((a.0 as u64 * b.0 as u64) % self.spec.p) as u32);
        }
        let t = self.mul_tables();
        let n = self.q - 1;
        let i = (t.log[a.0 as usize] as u64 + t.log[b.0 as usize] as u64) % n;
        Fe(t.exp[i as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.spec.m == 1 {
            return Ok(Fe(gfp_poly::mod_inv(a.0 as u64, self.spec.p) as u32));
        }
        let t = self.mul_tables();
        let n = self.q - 1;
        let i = (n - t.log[a.0 as usize] as u64) % n;
        Ok(Fe(t.exp[i as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let mut base = a;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Frobenius x -> x^(p^s).
    pub fn frobenius(&self, x: Fe, s: usize) -> Fe {
        let mut out = x;
        for _ in 0..s {
            out = self.pow(out, self.spec.p);
        }
        out
    }

    /// Relative trace onto GF(p^sub_degree): sum of x over the Galois orbit
    /// x, x^(p^s), x^(p^2s), ...
    pub fn trace(&self, x: Fe, sub_degree: usize) -> Result<Fe, FieldError> {
        if sub_degree == 0 || self.spec.m % sub_degree != 0 {
            return Err(FieldError::NotADivisor(sub_degree, self.spec.m));
        }
        let steps = self.spec.m / sub_degree;
        let mut acc = Fe::ZERO;
        let mut cur = x;
        for _ in 0..steps {
            acc = self.add(acc, cur);
            cur = self.frobenius(cur, sub_degree);
        }
        Ok(acc)
    }

    /// Absolute trace to GF(p), returned as an integer in [0, p).
    pub fn abs_trace(&self, x: Fe) -> u64 {
        let t = self.trace(x, 1).expect("1 divides m");
        debug_assert!(self.in_subfield(t, 1));
        t.0 as u64
    }

    /// True iff x lies in the subfield GF(p^s), i.e. x^(p^s) = x.
    pub fn in_subfield(&self, x: Fe, s: usize) -> bool {
        self.frobenius(x, s) == x
    }

    /// Dot product of equal-length element vectors.
    pub fn dot(&self, a: &[Fe], b: &[Fe]) -> Fe {
        assert_eq!(a.len(), b.len());
        let mut acc = Fe::ZERO;
        for (&x, &y) in a.iter().zip(b) {
            acc = self.add(acc, self.mul(x, y));
        }
        acc
    }

    /// Scalar multiplication of a vector over GF(q)^t.
    pub fn scale_vec(&self, c: Fe, v: &[Fe]) -> Vec<Fe> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    pub fn add_vec(&self, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }
}

/// A character of the additive group GF(p)^n, indexed by a vector `a`.
/// Trivial iff a = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    pub p: u64,
    pub a: Vec<u32>,
}

impl Character {
    pub fn new(p: u64, a: Vec<u32>) -> Character {
        assert!(a.iter().all(|&c| (c as u64) < p));
        Character { p, a }
    }

    pub fn trivial(p: u64, n: usize) -> Character {
        Character { p, a: vec![0; n] }
    }

    pub fn is_trivial(&self) -> bool {
        self.a.iter().all(|&c| c == 0)
    }

    /// chi_a(x) = e^(2 pi i (a.x) / p).
    pub fn eval(&self, x: &[u32]) -> Result<Complex64, FieldError> {
        if x.len() != self.a.len() {
            return Err(FieldError::DimensionMismatch(x.len(), self.a.len()));
        }
        let mut dot = 0u64;
        for (&ai, &xi) in self.a.iter().zip(x) {
            dot = (dot + ai as u64 * xi as u64) % self.p;
        }
        Ok(Complex64::from_polar(1.0, TAU * dot as f64 / self.p as f64))
    }

    /// Iterator over all p^n characters of GF(p)^n.
    pub fn all(p: u64, n: usize) -> impl Iterator<Item = Character> {
        let total = p.pow(n as u32);
        (0..total).map(move |k| {
            let mut a = Vec::with_capacity(n);
            let mut kk = k;
            for _ in 0..n {
                a.push((kk % p) as u32);
                kk /= p;
            }
            Character { p, a }
        })
    }
}

/// A GF(p^s)-linear functional phi: GF(p^m) -> GF(p^s) with phi restricted to
/// the subfield equal to the identity. Realized as projection onto the first
/// vector of a deterministically chosen subfield basis with leading vector 1.
#[derive(Debug, Clone)]
pub struct SubfieldFunctional {
    pub sub_degree: usize,
    /// GF(p^s)-basis of GF(p^m), basis[0] = 1.
    pub basis: Vec<Fe>,
    /// Inverse of the GF(p)-matrix whose columns are s_j * b_i for the
    /// GF(p)-basis s_j of GF(p^s); used to expand arbitrary elements.
    expand: Vec<Vec<u32>>,
    p: u64,
}

impl SubfieldFunctional {
    /// Expands x in the subfield basis: x = sum_i coords[i] * basis[i] with
    /// every coords[i] in the embedded subfield GF(p^s).
    pub fn expand(&self, field: &Field, x: Fe) -> Vec<Fe> {
        let m = field.m();
        let s = self.sub_degree;
        let coords = field.coords(x);
        let mut c = vec![0u64; m];
        for (i, row) in self.expand.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                c[i] = (c[i] + e as u64 * coords[j] as u64) % self.p;
            }
        }
        let sub_basis = subfield_gfp_basis(field, s);
        (0..m / s)
            .map(|i| {
                let mut out = Fe::ZERO;
                for (j, &cj) in c[i * s..(i + 1) * s].iter().enumerate() {
                    if cj != 0 {
                        out = field.add(out, field.mul(field.from_int(cj), sub_basis[j]));
                    }
                }
                out
            })
            .collect()
    }

    /// phi(x), guaranteed to lie in GF(p^s).
    pub fn apply(&self, field: &Field, x: Fe) -> Fe {
        let m = field.m();
        let s = self.sub_degree;
        let coords = field.coords(x);
        // expand coordinates through the precomputed inverse matrix
        let mut c = vec![0u64; m];
        for (i, row) in self.expand.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                c[i] = (c[i] + e as u64 * coords[j] as u64) % self.p;
            }
        }
        // coefficient of basis[0] is the GF(p^s) element with GF(p)-coordinates
        // c[0..s] in the polynomial basis of the subfield's embedding elements.
        let mut out = Fe::ZERO;
        for (j, &cj) in c[..s].iter().enumerate() {
            if cj != 0 {
                let sub_basis_j = subfield_gfp_basis(field, s)[j];
                out = field.add(out, field.mul(field.from_int(cj), sub_basis_j));
            }
        }
        out
    }
}

/// A deterministic GF(p)-basis of the subfield GF(p^s) inside GF(p^m):
/// the first s elements of the subfield, in index order, that are
/// GF(p)-independent. The first is always 1.
fn subfield_gfp_basis(field: &Field, s: usize) -> Vec<Fe> {
    let p = field.p();
    let mut basis: Vec<Fe> = vec![Fe::ONE];
    let mut span: Vec<Fe> = (0..p).map(|c| field.from_int(c)).collect();
    let mut cand = 2u64;
    while basis.len() < s {
        let x = Fe(cand as u32);
        cand += 1;
        assert!(cand <= field.size(), "ran out of candidates");
        if !field.in_subfield(x, s) || span.contains(&x) {
            continue;
        }
        let mut new_span = Vec::with_capacity(span.len() * p as usize);
        for &v in &span {
            for c in 0..p {
                new_span.push(field.add(v, field.mul(field.from_int(c), x)));
            }
        }
        span = new_span;
        basis.push(x);
    }
    basis
}

/// Builds the subfield functional for GF(p^m) -> GF(p^s), s | m.
pub fn subfield_functional(field: &Field, sub_degree: usize) -> Result<SubfieldFunctional, FieldError> {
    let m = field.m();
    let s = sub_degree;
    if s == 0 || m % s != 0 {
        return Err(FieldError::NotADivisor(s, m));
    }
    let p = field.p();
    // GF(p^s)-basis of GF(p^m) with basis[0] = 1, chosen greedily in index order.
    let sub_basis = subfield_gfp_basis(field, s);
    let mut basis: Vec<Fe> = vec![Fe::ONE];
    // GF(p)-span of { s_j * b_i }
    let build_matrix = |basis: &[Fe]| -> Vec<Vec<u32>> {
        let mut cols = Vec::new();
        for &b in basis {
            for &sj in &sub_basis {
                cols.push(field.coords(field.mul(sj, b)));
            }
        }
        cols
    };
    let gfp_rank = |cols: &[Vec<u32>]| -> usize {
        // Gaussian elimination over GF(p) on column vectors
        let mut rows: Vec<Vec<u64>> = cols.iter().map(|c| c.iter().map(|&x| x as u64).collect()).collect();
        let mut rank = 0;
        let ncols = m;
        for col in 0..ncols {
            if let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) {
                rows.swap(rank, pivot);
                let inv = gfp_poly::mod_inv(rows[rank][col], p);
                for c in 0..ncols {
                    rows[rank][c] = rows[rank][c] * inv % p;
                }
                for r in 0..rows.len() {
                    if r != rank && rows[r][col] != 0 {
                        let f = rows[r][col];
                        for c in 0..ncols {
                            rows[r][c] = (rows[r][c] + p * p - f * rows[rank][c] % p) % p;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    };
    let mut cand = 1u64;
    while basis.len() < m / s {
        cand += 1;
        assert!(cand < field.size(), "subfield basis search exhausted");
        let x = Fe(cand as u32);
        let mut trial = basis.clone();
        trial.push(x);
        if gfp_rank(&build_matrix(&trial)) == trial.len() * s {
            basis.push(x);
        }
    }
    // invert the m x m matrix with columns s_j * b_i over GF(p)
    let cols = build_matrix(&basis);
    let mut aug: Vec<Vec<u64>> = (0..m)
        .map(|r| {
            let mut row: Vec<u64> = cols.iter().map(|c| c[r] as u64).collect();
            let mut id = vec![0u64; m];
            id[r] = 1;
            row.extend(id);
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| aug[r][col] != 0).expect("matrix invertible");
        aug.swap(col, pivot);
        let inv = gfp_poly::mod_inv(aug[col][col], p);
        for c in 0..2 * m {
            aug[col][c] = aug[col][c] * inv % p;
        }
        for r in 0..m {
            if r != col && aug[r][col] != 0 {
                let f = aug[r][col];
                for c in 0..2 * m {
                    aug[r][c] = (aug[r][c] + p * p - f * aug[col][c] % p) % p;
                }
            }
        }
    }
    let expand: Vec<Vec<u32>> = (0..m)
        .map(|r| (0..m).map(|c| aug[r][m + c] as u32).collect())
        .collect();
    Ok(SubfieldFunctional { sub_degree: s, basis, expand, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn modulus_choice_is_deterministic_and_least() {
        // GF(2): modulus X
        let f = Field::new(2, 1).unwrap();
        assert_eq!(f.spec().modulus, vec![0, 1]);
        // GF(4): enumerate monic degree-2 polynomials over GF(2), test
        // irreducibility independently, pick the least.
        let mut expected = None;
        for k in 0..4u64 {
            let f = vec![k % 2, k / 2, 1];
            // independent irreducibility check: a degree-2 poly over GF(2) is
            // irreducible iff it has no root
            let no_root = (0..2u64).all(|x| (f[0] + f[1] * x + f[2] * x * x) % 2 != 0);
            if no_root {
                expected = Some(f);
                break;
            }
        }
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.spec().modulus, expected.unwrap());
        assert_eq!(f4.spec().modulus, vec![1, 1, 1]); // X^2+X+1
        // GF(5): prime field
        let f5 = Field::new(5, 1).unwrap();
        assert_eq!(f5.spec().modulus, vec![0, 1]);
        assert_eq!(f5.size(), 5);
    }

    #[test]
    fn non_prime_rejected() {
        assert_eq!(Field::new(4, 1).unwrap_err(), FieldError::NonPrime(4));
        assert_eq!(Field::new(1, 1).unwrap_err(), FieldError::NonPrime(1));
    }

    #[test]
    fn gf4_multiplication_table() {
        let f = Field::new(2, 2).unwrap();
        let w = Fe(2); // X
        // X^2 = X + 1 under modulus X^2+X+1
        assert_eq!(f.mul(w, w), Fe(3));
        assert_eq!(f.mul(w, Fe(3)), Fe::ONE); // X * (X+1) = X^2+X = 1
        assert_eq!(f.inv(w).unwrap(), Fe(3));
    }

    fn field_axioms_hold(f: &Field, a: Fe, b: Fe, c: Fe) {
        assert_eq!(f.add(a, b), f.add(b, a));
        assert_eq!(f.mul(a, b), f.mul(b, a));
        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
        assert_eq!(f.mul(a, Fe::ONE), a);
        if !a.is_zero() {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
        }
    }

    proptest! {
        #[test]
        fn field_axioms_random_triples(case in 0usize..6, seed in 0u64..1000) {
            let specs = [(2, 1), (2, 4), (3, 2), (5, 1), (7, 2), (2, 16)];
            let (p, m) = specs[case];
            let f = Field::new(p, m).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = Fe(rng.random_range(0..f.size()) as u32);
            let b = Fe(rng.random_range(0..f.size()) as u32);
            let c = Fe(rng.random_range(0..f.size()) as u32);
            field_axioms_hold(&f, a, b, c);
        }
    }

    #[test]
    fn trace_gf4_to_gf2() {
        let f = Field::new(2, 2).unwrap();
        let w = Fe(2);
        // tr(w) = w + w^2 = w + (w+1) = 1
        assert_eq!(f.trace(w, 1).unwrap(), Fe::ONE);
        assert_eq!(f.trace(Fe::ZERO, 1).unwrap(), Fe::ZERO);
        // m = sub_degree: identity
        let f2 = Field::new(2, 1).unwrap();
        assert_eq!(f2.trace(Fe::ONE, 1).unwrap(), Fe::ONE);
        assert!(f.trace(w, 3).is_err());
    }

    #[test]
    fn trace_linear_and_surjective_exhaustive() {
        // GF(p^m) up to 256: trace to each subfield is GF(p^sub)-linear and onto
        for (p, m) in [(2u64, 4usize), (3, 2), (2, 8), (5, 2)] {
            let f = Field::new(p, m).unwrap();
            for s in (1..=m).filter(|s| m % s == 0) {
                let mut image = std::collections::HashSet::new();
                for x in f.iter() {
                    let t = f.trace(x, s).unwrap();
                    assert!(f.in_subfield(t, s));
                    image.insert(t);
                }
                assert_eq!(image.len() as u64, p.pow(s as u32), "trace not surjective");
                // additivity (exhaustive is too big; fixed sample)
                let mut rng = ChaCha12Rng::seed_from_u64(7);
                for _ in 0..200 {
                    let a = Fe(rng.random_range(0..f.size()) as u32);
                    let b = Fe(rng.random_range(0..f.size()) as u32);
                    assert_eq!(
                        f.trace(f.add(a, b), s).unwrap(),
                        f.add(f.trace(a, s).unwrap(), f.trace(b, s).unwrap())
                    );
                    // GF(p^s)-linearity: tr(c x) = c tr(x) for c in subfield
                    let c = (0..f.size()).map(Fe::from_raw).find(|&c| f.in_subfield(c, s)).unwrap();
                    assert_eq!(f.trace(f.mul(c, a), s).unwrap(), f.mul(c, f.trace(a, s).unwrap()));
                }
            }
        }
    }

    impl Fe {
        fn from_raw(v: u64) -> Fe {
            Fe(v as u32)
        }
    }

    #[test]
    fn character_values() {
        // trivial character is 1 everywhere
        let chi0 = Character::trivial(5, 2);
        assert!((chi0.eval(&[3, 4]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // p=2, a=x=(1) -> -1
        let chi = Character::new(2, vec![1]);
        assert!((chi.eval(&[1]).unwrap() - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        // p=3, a=(1), x=(2) -> e^{4 pi i/3}
        let chi3 = Character::new(3, vec![1]);
        let expected = Complex64::from_polar(1.0, 2.0 * TAU / 3.0);
        assert!((chi3.eval(&[2]).unwrap() - expected).norm() < 1e-12);
        // dimension mismatch
        assert!(chi3.eval(&[1, 2]).is_err());
    }

    #[test]
    fn character_homomorphism_and_sum() {
        let p = 3u64;
        let n = 3usize;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for chi in Character::all(p, n) {
            // homomorphism on random pairs
            for _ in 0..20 {
                let x: Vec<u32> = (0..n).map(|_| rng.random_range(0..p) as u32).collect();
                let y: Vec<u32> = (0..n).map(|_| rng.random_range(0..p) as u32).collect();
                let xy: Vec<u32> = x.iter().zip(&y).map(|(&a, &b)| ((a as u64 + b as u64) % p) as u32).collect();
                let lhs = chi.eval(&xy).unwrap();
                let rhs = chi.eval(&x).unwrap() * chi.eval(&y).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
            // sum over the group vanishes for nontrivial characters
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..p.pow(n as u32) {
                let mut x = Vec::with_capacity(n);
                let mut kk = k;
                for _ in 0..n {
                    x.push((kk % p) as u32);
                    kk /= p;
                }
                sum += chi.eval(&x).unwrap();
            }
            if chi.is_trivial() {
                assert!((sum.re - p.pow(n as u32) as f64).abs() < 1e-9);
            } else {
                assert!(sum.norm() < 1e-9, "nontrivial character sum {sum}");
            }
        }
    }

    #[test]
    fn subfield_functional_examples() {
        // phi(1) = 1 always
        let f4 = Field::new(2, 2).unwrap();
        let phi = subfield_functional(&f4, 1).unwrap();
        assert_eq!(phi.apply(&f4, Fe::ONE), Fe::ONE);
        // GF(4)->GF(2) constant-term projection: phi(w)=0, phi(1+w)=1
        let w = Fe(2);
        assert_eq!(phi.apply(&f4, w), Fe::ZERO);
        assert_eq!(phi.apply(&f4, f4.add(Fe::ONE, w)), Fe::ONE);
        // GF(2)->GF(2): identity
        let f2 = Field::new(2, 1).unwrap();
        let phi2 = subfield_functional(&f2, 1).unwrap();
        for x in f2.iter() {
            assert_eq!(phi2.apply(&f2, x), x);
        }
        assert!(subfield_functional(&f4, 3).is_err());
    }

    #[test]
    fn subfield_functional_gf16_to_gf4_linear() {
        let f = Field::new(2, 4).unwrap();
        let phi = subfield_functional(&f, 2).unwrap();
        // identity on the subfield
        for x in f.iter() {
            if f.in_subfield(x, 2) {
                assert_eq!(phi.apply(&f, x), x);
            }
        }
        // GF(4)-linearity: phi(c x) = c phi(x) for c in GF(4), exhaustive
        for c in f.iter().filter(|&c| f.in_subfield(c, 2)) {
            for x in f.iter() {
                assert_eq!(phi.apply(&f, f.mul(c, x)), f.mul(c, phi.apply(&f, x)));
                assert!(f.in_subfield(phi.apply(&f, x), 2));
            }
        }
    }
}
