//! Multivariate polynomials over GF(q) and product-grid interpolation.
//!
//! Terms are kept in a map from exponent vector to nonzero coefficient;
//! graded-lex order fixes every serialized or enumerated basis.

use crate::field::{Fe, Field};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("point dimension {0} does not match variable count {1}")]
    DimensionMismatch(usize, usize),
    #[error("evaluation grid is not a product set: {0}")]
    NotAGrid(String),
    #[error("cap {cap} does not match axis size {size} on axis {axis}")]
    CapMismatch { axis: usize, cap: usize, size: usize },
    #[error("axis groups do not partition the variable set")]
    BadPartition,
}

/// Sparse multivariate polynomial. Exponent vectors all have length
/// `num_vars`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    pub num_vars: usize,
    pub terms: BTreeMap<Vec<u16>, Fe>,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Polynomial {
        Polynomial { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: Fe) -> Polynomial {
        let mut p = Polynomial::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; num_vars], c);
        }
        p
    }

    pub fn monomial(num_vars: usize, exps: &[u16], c: Fe) -> Polynomial {
        assert_eq!(exps.len(), num_vars);
        let mut p = Polynomial::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(exps.to_vec(), c);
        }
        p
    }

    /// The variable X_i.
    pub fn var(num_vars: usize, i: usize) -> Polynomial {
        let mut e = vec![0u16; num_vars];
        e[i] = 1;
        Polynomial::monomial(num_vars, &e, Fe::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as i64).sum())
            .max()
            .unwrap_or(-1)
    }

    pub fn degree_in(&self, var: usize) -> i64 {
        self.terms.keys().map(|e| e[var] as i64).max().unwrap_or(-1)
    }

    pub fn add_term(&mut self, field: &Field, exps: Vec<u16>, c: Fe) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(Fe::ZERO);
        *entry = field.add(*entry, c);
        if entry.is_zero() {
            let key: Vec<u16> = self
                .terms
                .iter()
                .find(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .unwrap();
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, field: &Field, other: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, other.num_vars);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(field, e.clone(), c);
        }
        out
    }

    pub fn scale(&self, field: &Field, c: Fe) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.num_vars);
        }
        Polynomial {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, &v)| (e.clone(), field.mul(c, v))).collect(),
        }
    }

    pub fn mul(&self, field: &Field, other: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, other.num_vars);
        let mut out = Polynomial::zero(self.num_vars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(&x, &y)| x + y).collect();
                out.add_term(field, e, field.mul(ca, cb));
            }
        }
        out
    }

    pub fn eval(&self, field: &Field, point: &[Fe]) -> Result<Fe, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch(point.len(), self.num_vars));
        }
        let mut acc = Fe::ZERO;
        for (e, &c) in &self.terms {
            let mut term = c;
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = field.mul(term, field.pow(point[i], exp as u64));
                }
            }
            acc = field.add(acc, term);
        }
        Ok(acc)
    }

    /// Renames variables: new polynomial in `new_num_vars` variables where old
    /// variable i becomes new variable map[i].
    pub fn embed(&self, new_num_vars: usize, map: &[usize]) -> Polynomial {
        assert_eq!(map.len(), self.num_vars);
        let mut out = Polynomial::zero(new_num_vars);
        for (e, &c) in &self.terms {
            let mut ne = vec![0u16; new_num_vars];
            for (i, &exp) in e.iter().enumerate() {
                ne[map[i]] += exp;
            }
            out.terms.insert(ne, c);
        }
        out
    }

    /// Substitutes each variable X_i by a univariate polynomial s_i(X_0) given
    /// as (constant, slope): X_i -> c_i + a_i X_0, producing a univariate
    /// polynomial in X_0. Used for affine-line restrictions.
    pub fn restrict_to_line(&self, field: &Field, consts: &[Fe], slopes: &[Fe]) -> Polynomial {
        assert_eq!(consts.len(), self.num_vars);
        assert_eq!(slopes.len(), self.num_vars);
        let mut out = Polynomial::zero(1);
        for (e, &c) in &self.terms {
            let mut term = Polynomial::constant(1, c);
            for (i, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                let mut lin = Polynomial::constant(1, consts[i]);
                lin.add_term(field, vec![1], slopes[i]);
                for _ in 0..exp {
                    term = term.mul(field, &lin);
                }
            }
            out = out.add(field, &term);
        }
        out
    }

    /// Monomials in graded-lex order (total degree, then lex on exponents).
    pub fn graded_lex_terms(&self) -> Vec<(Vec<u16>, Fe)> {
        let mut v: Vec<(Vec<u16>, Fe)> = self.terms.iter().map(|(e, &c)| (e.clone(), c)).collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().map(|&x| x as u32).sum();
            let db: u32 = b.0.iter().map(|&x| x as u32).sum();
            da.cmp(&db).then(a.0.cmp(&b.0))
        });
        v
    }
}

/// Monomial exponent vectors of all t-variate monomials of total degree < bound,
/// in graded-lex order.
pub fn monomials_below_total_degree(t: usize, bound: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; t];
    fn rec(out: &mut Vec<Vec<u16>>, cur: &mut Vec<u16>, pos: usize, remaining: usize) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=remaining {
            cur[pos] = e as u16;
            rec(out, cur, pos + 1, remaining - e);
        }
        cur[pos] = 0;
    }
    if bound > 0 {
        rec(&mut out, &mut cur, 0, bound - 1);
    }
    out.sort_by(|a, b| {
        let da: u32 = a.iter().map(|&x| x as u32).sum();
        let db: u32 = b.iter().map(|&x| x as u32).sum();
        da.cmp(&db).then(a.cmp(b))
    });
    out
}

/// Drops every monomial whose total degree within some group of variables
/// reaches that group's threshold. Groups must partition the variable set.
pub fn truncate_high_degree(
    f: &Polynomial,
    axis_groups: &[Vec<usize>],
    thresholds: &[usize],
) -> Result<Polynomial, PolyError> {
    if axis_groups.len() != thresholds.len() {
        return Err(PolyError::BadPartition);
    }
    let mut seen = vec![false; f.num_vars];
    for g in axis_groups {
        for &v in g {
            if v >= f.num_vars || seen[v] {
                return Err(PolyError::BadPartition);
            }
            seen[v] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(PolyError::BadPartition);
    }
    let mut out = Polynomial::zero(f.num_vars);
    'terms: for (e, &c) in &f.terms {
        for (g, &th) in axis_groups.iter().zip(thresholds) {
            let deg: usize = g.iter().map(|&v| e[v] as usize).sum();
            if deg >= th {
                continue 'terms;
            }
        }
        out.terms.insert(e.clone(), c);
    }
    Ok(out)
}

/// Dense tensor of field elements over a product grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<Fe>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>) -> Tensor {
        let len = shape.iter().product();
        Tensor { shape, data: vec![Fe::ZERO; len] }
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.shape.len());
        let mut idx = 0;
        for (i, &m) in multi.iter().enumerate() {
            debug_assert!(m < self.shape[i]);
            idx = idx * self.shape[i] + m;
        }
        idx
    }

    pub fn get(&self, multi: &[usize]) -> Fe {
        self.data[self.index(multi)]
    }

    pub fn set(&mut self, multi: &[usize], v: Fe) {
        let i = self.index(multi);
        self.data[i] = v;
    }
}

/// Inverse Vandermonde: matrix M with M * (f(s_0),...,f(s_{k-1}))^T =
/// coefficients of f, for distinct points s_i and deg f < k.
pub fn inverse_vandermonde(field: &Field, points: &[Fe]) -> Vec<Vec<Fe>> {
    let k = points.len();
    // Lagrange basis: L_j(X) = prod_{i != j} (X - s_i)/(s_j - s_i);
    // column j of the inverse is the coefficient vector of L_j.
    let mut out = vec![vec![Fe::ZERO; k]; k];
    for j in 0..k {
        // numerator polynomial
        let mut num = vec![Fe::ONE]; // coefficients low-to-high
        for (i, &si) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            // num *= (X - s_i)
            let mut next = vec![Fe::ZERO; num.len() + 1];
            for (d, &c) in num.iter().enumerate() {
                next[d + 1] = field.add(next[d + 1], c);
                next[d] = field.sub(next[d], field.mul(c, si));
            }
            num = next;
        }
        let mut denom = Fe::ONE;
        for (i, &si) in points.iter().enumerate() {
            if i != j {
                denom = field.mul(denom, field.sub(points[j], si));
            }
        }
        let dinv = field.inv(denom).expect("distinct points");
        for d in 0..k {
            let c = num.get(d).copied().unwrap_or(Fe::ZERO);
            out[d][j] = field.mul(c, dinv);
        }
    }
    out
}

/// Interpolates values on a product grid `axes[0] x ... x axes[t-1]` to the
/// unique polynomial with per-variable degree < axis size, by applying the
/// per-axis inverse Vandermonde along each axis.
pub fn interpolate_grid(
    field: &Field,
    axes: &[Vec<Fe>],
    values: &Tensor,
) -> Result<Polynomial, PolyError> {
    let t = axes.len();
    if values.shape.len() != t {
        return Err(PolyError::NotAGrid(format!(
            "tensor rank {} vs {} axes",
            values.shape.len(),
            t
        )));
    }
    for (axis, pts) in axes.iter().enumerate() {
        if values.shape[axis] != pts.len() {
            return Err(PolyError::CapMismatch { axis, cap: values.shape[axis], size: pts.len() });
        }
        let mut seen = std::collections::HashSet::new();
        for &p in pts {
            if !seen.insert(p) {
                return Err(PolyError::NotAGrid(format!("axis {axis} has repeated points")));
            }
        }
    }
    let mut data = values.data.clone();
    let shape = values.shape.clone();
    let total: usize = shape.iter().product();
    for axis in 0..t {
        let inv = inverse_vandermonde(field, &axes[axis]);
        let k = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = total / (k * inner.max(1));
        let mut next = data.clone();
        for o in 0..outer {
            for i in 0..inner.max(1) {
                // gather the axis fiber
                let base = o * k * inner.max(1) + i;
                for d in 0..k {
                    let mut acc = Fe::ZERO;
                    for s in 0..k {
                        let v = data[base + s * inner.max(1)];
                        acc = field.add(acc, field.mul(inv[d][s], v));
                    }
                    next[base + d * inner.max(1)] = acc;
                }
            }
        }
        data = next;
    }
    // data now holds coefficients indexed by exponent multi-index
    let mut poly = Polynomial::zero(t);
    let mut multi = vec![0usize; t];
    for (flat, &c) in data.iter().enumerate() {
        if !c.is_zero() {
            let mut rem = flat;
            for ax in (0..t).rev() {
                multi[ax] = rem % shape[ax];
                rem /= shape[ax];
            }
            poly.terms.insert(multi.iter().map(|&e| e as u16).collect(), c);
        }
    }
    Ok(poly)
}

/// Evaluates a polynomial on every point of a product grid.
pub fn evaluate_grid(field: &Field, poly: &Polynomial, axes: &[Vec<Fe>]) -> Tensor {
    let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let mut out = Tensor::new(shape.clone());
    let total: usize = shape.iter().product();
    let t = axes.len();
    let mut multi = vec![0usize; t];
    for flat in 0..total {
        let mut rem = flat;
        for ax in (0..t).rev() {
            multi[ax] = rem % shape[ax];
            rem /= shape[ax];
        }
        let point: Vec<Fe> = multi.iter().enumerate().map(|(ax, &i)| axes[ax][i]).collect();
        out.data[flat] = poly.eval(field, &point).expect("dimensions match");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_poly(field: &Field, rng: &mut ChaCha12Rng, vars: usize, max_deg: u16) -> Polynomial {
        let mut p = Polynomial::zero(vars);
        for _ in 0..rng.random_range(0..6) {
            let exps: Vec<u16> = (0..vars).map(|_| rng.random_range(0..=max_deg)).collect();
            p.add_term(field, exps, Fe(rng.random_range(0..field.size()) as u32));
        }
        p
    }

    proptest! {
        #[test]
        fn evaluation_is_a_ring_homomorphism(seed in 0u64..500, case in 0usize..3) {
            let specs = [(5u64, 1usize), (2, 3), (7, 1)];
            let (p, m) = specs[case];
            let field = Field::new(p, m).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = random_poly(&field, &mut rng, 2, 3);
            let b = random_poly(&field, &mut rng, 2, 3);
            let point: Vec<Fe> = (0..2)
                .map(|_| Fe(rng.random_range(0..field.size()) as u32))
                .collect();
            let sum = a.add(&field, &b).eval(&field, &point).unwrap();
            prop_assert_eq!(
                sum,
                field.add(a.eval(&field, &point).unwrap(), b.eval(&field, &point).unwrap())
            );
            let prod = a.mul(&field, &b).eval(&field, &point).unwrap();
            prop_assert_eq!(
                prod,
                field.mul(a.eval(&field, &point).unwrap(), b.eval(&field, &point).unwrap())
            );
        }
    }

    #[test]
    fn constant_and_identity_interpolation() {
        let f = Field::new(5, 1).unwrap();
        let axis: Vec<Fe> = (0..5).map(Fe).collect();
        // constant tensor -> constant polynomial
        let mut t = Tensor::new(vec![5]);
        t.data.fill(Fe(3));
        let p = interpolate_grid(&f, &[axis.clone()], &t).unwrap();
        assert_eq!(p, Polynomial::constant(1, Fe(3)));
        // identity values -> X
        let mut t = Tensor::new(vec![5]);
        for i in 0..5 {
            t.data[i] = Fe(i as u32);
        }
        let p = interpolate_grid(&f, &[axis], &t).unwrap();
        assert_eq!(p, Polynomial::var(1, 0));
    }

    #[test]
    fn and_truth_table_is_x1x2() {
        let f = Field::new(2, 1).unwrap();
        let axis: Vec<Fe> = vec![Fe(0), Fe(1)];
        let mut t = Tensor::new(vec![2, 2]);
        t.set(&[1, 1], Fe::ONE);
        let p = interpolate_grid(&f, &[axis.clone(), axis], &t).unwrap();
        let expected = Polynomial::monomial(2, &[1, 1], Fe::ONE);
        assert_eq!(p, expected);
    }

    #[test]
    fn interpolation_round_trips() {
        let f = Field::new(7, 1).unwrap();
        let axes = vec![
            vec![Fe(0), Fe(1), Fe(2), Fe(5)],
            vec![Fe(3), Fe(4), Fe(6)],
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..20 {
            // random polynomial within caps
            let mut p = Polynomial::zero(2);
            for e0 in 0..4u16 {
                for e1 in 0..3u16 {
                    if rng.random_bool(0.5) {
                        p.add_term(&f, vec![e0, e1], Fe(rng.random_range(0..7)));
                    }
                }
            }
            let vals = evaluate_grid(&f, &p, &axes);
            let q = interpolate_grid(&f, &axes, &vals).unwrap();
            assert_eq!(p, q);
            // tensor round trip
            let vals2 = evaluate_grid(&f, &q, &axes);
            assert_eq!(vals, vals2);
        }
    }

    #[test]
    fn truncation_drops_by_group_degree() {
        let f = Field::new(5, 1).unwrap();
        // f = X0^2 + X0 in one group, threshold 2 -> X0 survives
        let mut p = Polynomial::zero(1);
        p.add_term(&f, vec![2], Fe::ONE);
        p.add_term(&f, vec![1], Fe::ONE);
        let t = truncate_high_degree(&p, &[vec![0]], &[2]).unwrap();
        assert_eq!(t, Polynomial::var(1, 0));
        // threshold large -> identity
        let t = truncate_high_degree(&p, &[vec![0]], &[1000]).unwrap();
        assert_eq!(t, p);
        // mixed groups: kept iff every group degree below its bound
        let mut q = Polynomial::zero(3);
        q.add_term(&f, vec![1, 2, 0], Fe(2)); // group {0}: 1, group {1,2}: 2
        q.add_term(&f, vec![0, 1, 1], Fe(3)); // group degrees 0 and 2
        q.add_term(&f, vec![2, 0, 0], Fe(4)); // group degrees 2 and 0
        let t = truncate_high_degree(&q, &[vec![0], vec![1, 2]], &[2, 3]).unwrap();
        let mut expected = Polynomial::zero(3);
        expected.add_term(&f, vec![1, 2, 0], Fe(2));
        expected.add_term(&f, vec![0, 1, 1], Fe(3));
        assert_eq!(t, expected);
        // bad partition
        assert!(truncate_high_degree(&q, &[vec![0], vec![1]], &[2, 2]).is_err());
    }

    #[test]
    fn restrict_to_line_matches_pointwise() {
        let f = Field::new(7, 1).unwrap();
        let mut p = Polynomial::zero(3);
        p.add_term(&f, vec![2, 1, 0], Fe(3));
        p.add_term(&f, vec![0, 0, 2], Fe(5));
        let consts = vec![Fe(0), Fe(2), Fe(6)];
        let slopes = vec![Fe(1), Fe(3), Fe(4)];
        let line = p.restrict_to_line(&f, &consts, &slopes);
        for u in 0..7u32 {
            let x = Fe(u);
            let point: Vec<Fe> = (0..3)
                .map(|i| f.add(consts[i], f.mul(slopes[i], x)))
                .collect();
            assert_eq!(line.eval(&f, &[x]).unwrap(), p.eval(&f, &point).unwrap());
        }
    }
}
