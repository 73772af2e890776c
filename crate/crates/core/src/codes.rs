//! Evaluation codes: twisted Reed-Solomon / Reed-Muller codes, duals,
//! shortening, star products, and brute-force weight oracles.

use crate::budget::{Budget, BudgetExceeded};
use crate::field::{Fe, Field};
use crate::linalg::{span_basis, SparseMat};
use crate::poly::Polynomial;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("point dimension {0} does not match variable count {1}")]
    DimensionMismatch(usize, usize),
    #[error("twist coefficient at position {0} is zero")]
    ZeroTwist(usize),
    #[error("degree bound {ell} outside [{lo}, {hi}]")]
    BadDegree { ell: usize, lo: usize, hi: usize },
    #[error("root set overlaps evaluation points at {0:?}")]
    OverlappingRoots(Fe),
    #[error("evaluation points are not distinct")]
    RepeatedPoints,
    #[error("no valid dual twist found (implementation bug)")]
    NoValidBeta,
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("stated rank {stated} does not match computed rank {computed}")]
    RankMismatch { stated: usize, computed: usize },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// Which matrix a [`LinearCode`] stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Generator,
    ParityCheck,
}

/// A linear code given by a sparse generator or parity-check matrix whose
/// rank is verified at construction.
#[derive(Debug, Clone)]
pub struct LinearCode {
    pub n: usize,
    pub kind: MatrixKind,
    pub matrix: SparseMat,
    pub rank: usize,
}

impl LinearCode {
    pub fn from_generator(field: &Field, matrix: SparseMat) -> LinearCode {
        let rank = matrix.rank(field);
        LinearCode { n: matrix.ncols, kind: MatrixKind::Generator, matrix, rank }
    }

    pub fn from_parity_check(field: &Field, matrix: SparseMat) -> LinearCode {
        let rank = matrix.rank(field);
        LinearCode { n: matrix.ncols, kind: MatrixKind::ParityCheck, matrix, rank }
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            MatrixKind::Generator => self.rank,
            MatrixKind::ParityCheck => self.n - self.rank,
        }
    }

    /// Rows of a generator matrix (computes the kernel when stored as a
    /// parity check).
    pub fn generator_rows(&self, field: &Field) -> Vec<Vec<Fe>> {
        match self.kind {
            MatrixKind::Generator => self.matrix.to_dense(),
            MatrixKind::ParityCheck => self.matrix.kernel_basis(field),
        }
    }

    pub fn contains(&self, field: &Field, word: &[Fe]) -> bool {
        assert_eq!(word.len(), self.n);
        match self.kind {
            MatrixKind::Generator => self.matrix.row_space_contains(field, word),
            MatrixKind::ParityCheck => {
                self.matrix.mul_vec(field, word).iter().all(|x| x.is_zero())
            }
        }
    }

    /// Exact minimum weight. Enumerates codewords when q^k is within budget,
    /// otherwise enumerates candidate supports (rank tests), whichever fits.
    pub fn min_weight(&self, field: &Field, budget: &Budget) -> Result<Option<usize>, CodeError> {
        let k = self.dimension();
        if k == 0 {
            return Ok(None);
        }
        let q = field.size();
        let words = Budget::power(q, k);
        if budget.check("codeword enumeration", words).is_ok() {
            let gens = self.generator_rows(field);
            let mut best = usize::MAX;
            let mut coeffs = vec![Fe::ZERO; k];
            // iterate over all q^k coefficient vectors, skipping zero
            for idx in 1..words {
                let mut rem = idx;
                for c in coeffs.iter_mut() {
                    *c = Fe((rem % q as u128) as u32);
                    rem /= q as u128;
                }
                let mut w = 0usize;
                for col in 0..self.n {
                    let mut acc = Fe::ZERO;
                    for (i, &c) in coeffs.iter().enumerate() {
                        if !c.is_zero() {
                            acc = field.add(acc, field.mul(c, gens[i][col]));
                        }
                    }
                    if !acc.is_zero() {
                        w += 1;
                        if w >= best {
                            break;
                        }
                    }
                }
                if w < best && w > 0 {
                    best = w;
                }
            }
            return Ok(Some(best));
        }
        // support enumeration: smallest w such that some nonzero codeword has
        // support inside a size-w set, i.e. the generator columns outside the
        // set have a nontrivial common kernel coefficient vector.
        let gens = SparseMat::from_dense(field, &self.generator_rows(field));
        for w in 1..=self.n {
            let combos = n_choose_k(self.n, w);
            budget.check("support enumeration", combos * (k * k) as u128)?;
            let mut found = false;
            for_each_subset(self.n, w, |support| {
                if found {
                    return;
                }
                let mut mask = vec![false; self.n];
                for &s in support {
                    mask[s] = true;
                }
                // restrict generator to complement columns; nonzero kernel
                // coefficient vector gives a codeword supported inside `support`
                let rows: Vec<Vec<(usize, Fe)>> = gens
                    .rows
                    .iter()
                    .map(|r| r.iter().filter(|&&(c, _)| !mask[c]).copied().collect())
                    .collect();
                let restricted = SparseMat { nrows: k, ncols: self.n, rows };
                if restricted.rank(field) < k {
                    // some combination vanishes outside support; it is nonzero
                    // as the generator has full rank k
                    found = true;
                }
            });
            if found {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }
}

fn n_choose_k(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// A twisted evaluation code ev_{E,alpha}(F_q[X]^{<ell}_Z) together with its
/// generator-form [`LinearCode`].
#[derive(Debug, Clone)]
pub struct EvaluationCode {
    pub points: Vec<Fe>,
    pub alpha: Vec<Fe>,
    pub ell: usize,
    pub roots: Vec<Fe>,
    pub code: LinearCode,
}

/// Component-wise evaluation of a multivariate polynomial on a point list,
/// with per-point nonzero twist.
pub fn evaluate(
    field: &Field,
    f: &Polynomial,
    points: &[Vec<Fe>],
    alpha: &[Fe],
) -> Result<Vec<Fe>, CodeError> {
    if points.len() != alpha.len() {
        return Err(CodeError::LengthMismatch(points.len(), alpha.len()));
    }
    if let Some(i) = alpha.iter().position(|a| a.is_zero()) {
        return Err(CodeError::ZeroTwist(i));
    }
    let mut out = Vec::with_capacity(points.len());
    for (pt, &a) in points.iter().zip(alpha) {
        if pt.len() != f.num_vars {
            return Err(CodeError::DimensionMismatch(pt.len(), f.num_vars));
        }
        let v = f.eval(field, pt).map_err(|_| CodeError::DimensionMismatch(pt.len(), f.num_vars))?;
        out.push(field.mul(a, v));
    }
    Ok(out)
}

/// Builds the twisted, shortened Reed-Solomon code ev_{E,alpha}(F_q[X]^{<ell}_Z).
///
/// The basis consists of the evaluations of X^j * prod_{z in Z}(X - z) for
/// j < ell - |Z|; the dimension is ell - |Z|.
pub fn rs_code(
    field: &Field,
    points: &[Fe],
    alpha: &[Fe],
    ell: usize,
    roots: &[Fe],
) -> Result<EvaluationCode, CodeError> {
    let n = points.len();
    if alpha.len() != n {
        return Err(CodeError::LengthMismatch(alpha.len(), n));
    }
    if let Some(i) = alpha.iter().position(|a| a.is_zero()) {
        return Err(CodeError::ZeroTwist(i));
    }
    let mut seen = std::collections::HashSet::new();
    for &p in points {
        if !seen.insert(p) {
            return Err(CodeError::RepeatedPoints);
        }
    }
    if let Some(&z) = roots.iter().find(|z| points.contains(z)) {
        return Err(CodeError::OverlappingRoots(z));
    }
    if ell < roots.len() || ell > n {
        return Err(CodeError::BadDegree { ell, lo: roots.len(), hi: n });
    }
    let dim = ell - roots.len();
    // vanishing polynomial on Z
    let mut van = Polynomial::constant(1, Fe::ONE);
    for &z in roots {
        let mut lin = Polynomial::var(1, 0);
        lin.add_term(field, vec![0], field.neg(z));
        van = van.mul(field, &lin);
    }
    let mut rows = Vec::with_capacity(dim);
    for j in 0..dim {
        let mono = Polynomial::monomial(1, &[j as u16], Fe::ONE);
        let f = mono.mul(field, &van);
        let pts: Vec<Vec<Fe>> = points.iter().map(|&p| vec![p]).collect();
        rows.push(evaluate(field, &f, &pts, alpha)?);
    }
    let gen = SparseMat::from_dense(field, &rows);
    let code = LinearCode::from_generator(field, gen);
    if code.rank != dim {
        return Err(CodeError::RankMismatch { stated: dim, computed: code.rank });
    }
    Ok(EvaluationCode {
        points: points.to_vec(),
        alpha: alpha.to_vec(),
        ell,
        roots: roots.to_vec(),
        code,
    })
}

/// Computes the dual twist: beta with ev_{E,alpha}(deg<m)^perp =
/// ev_{E,beta}(deg<|E|-m), normalized so beta's first coordinate is 1.
///
/// beta spans the 1-dimensional dual of ev_{E,alpha}(deg<|E|-1); the returned
/// pair is (beta, |E|-m). Duality is verified exactly: all pairwise inner
/// products of the two bases vanish.
pub fn rs_dual(
    field: &Field,
    points: &[Fe],
    alpha: &[Fe],
    m: usize,
) -> Result<(Vec<Fe>, usize), CodeError> {
    let n = points.len();
    if m > n {
        return Err(CodeError::BadDegree { ell: m, lo: 0, hi: n });
    }
    // rows: evaluations of alpha * X^i for i < n-1; kernel is 1-dimensional
    let full = rs_code(field, points, alpha, n.max(1) - 1, &[])?;
    let ker = if n == 1 {
        // deg < 0 space is zero; dual of zero... n=1: ev(deg<0) = {0},
        // perp of everything: beta any nonzero; kernel of empty matrix
        vec![vec![Fe::ONE]]
    } else {
        full.code.matrix.kernel_basis(field)
    };
    if ker.len() != 1 {
        return Err(CodeError::NoValidBeta);
    }
    let mut beta = ker.into_iter().next().unwrap();
    if beta.iter().any(|b| b.is_zero()) {
        return Err(CodeError::NoValidBeta);
    }
    // normalize first coordinate to 1
    let inv = field.inv(beta[0]).expect("nonzero");
    for b in beta.iter_mut() {
        *b = field.mul(inv, *b);
    }
    // verify duality exactly
    if m < n {
        let dual = rs_code(field, points, &beta, n - m, &[])?;
        let primal = rs_code(field, points, alpha, m, &[])?;
        for prow in &primal.code.matrix.to_dense() {
            for drow in &dual.code.matrix.to_dense() {
                if !field.dot(prow, drow).is_zero() {
                    return Err(CodeError::NoValidBeta);
                }
            }
        }
        // dimensions complement
        if primal.code.rank + dual.code.rank != n {
            return Err(CodeError::NoValidBeta);
        }
    }
    Ok((beta, n - m))
}

/// Component-wise product of two words.
pub fn star_product(field: &Field, a: &[Fe], b: &[Fe]) -> Result<Vec<Fe>, CodeError> {
    if a.len() != b.len() {
        return Err(CodeError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| field.mul(x, y)).collect())
}

/// Span of all pairwise star products of basis vectors of two codes.
pub fn span_star(field: &Field, c1: &LinearCode, c2: &LinearCode) -> Result<LinearCode, CodeError> {
    if c1.n != c2.n {
        return Err(CodeError::LengthMismatch(c1.n, c2.n));
    }
    let g1 = c1.generator_rows(field);
    let g2 = c2.generator_rows(field);
    let mut products = Vec::with_capacity(g1.len() * g2.len());
    for a in &g1 {
        for b in &g2 {
            products.push(star_product(field, a, b)?);
        }
    }
    let basis = span_basis(field, &products);
    Ok(LinearCode::from_generator(field, SparseMat::from_dense(field, &basis)))
}

/// Equality of codes as subspaces.
pub fn same_code(field: &Field, c1: &LinearCode, c2: &LinearCode) -> bool {
    if c1.n != c2.n || c1.dimension() != c2.dimension() {
        return false;
    }
    c1.generator_rows(field)
        .iter()
        .all(|row| c2.contains(field, row))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> Vec<Fe> {
        vec![Fe::ONE; n]
    }

    #[test]
    fn evaluate_examples() {
        let f = Field::new(5, 1).unwrap();
        let pts: Vec<Vec<Fe>> = (0..5).map(|i| vec![Fe(i)]).collect();
        // constant 1 with unit twist
        let c = evaluate(&f, &Polynomial::constant(1, Fe::ONE), &pts, &ones(5)).unwrap();
        assert_eq!(c, ones(5));
        // identity
        let x = evaluate(&f, &Polynomial::var(1, 0), &pts, &ones(5)).unwrap();
        assert_eq!(x, (0..5).map(Fe).collect::<Vec<_>>());
        // squares over GF(7) on {1,2,3}
        let f7 = Field::new(7, 1).unwrap();
        let pts7: Vec<Vec<Fe>> = [1u32, 2, 3].iter().map(|&i| vec![Fe(i)]).collect();
        let sq = evaluate(
            &f7,
            &Polynomial::monomial(1, &[2], Fe::ONE),
            &pts7,
            &ones(3),
        )
        .unwrap();
        assert_eq!(sq, vec![Fe(1), Fe(4), Fe(2)]);
        // zero twist rejected
        assert!(matches!(
            evaluate(&f, &Polynomial::var(1, 0), &pts, &[Fe::ONE, Fe::ZERO, Fe::ONE, Fe::ONE, Fe::ONE]),
            Err(CodeError::ZeroTwist(1))
        ));
    }

    #[test]
    fn rs_code_parameters() {
        let f = Field::new(5, 1).unwrap();
        let pts: Vec<Fe> = (0..5).map(Fe).collect();
        // [5,2,4]_5
        let c = rs_code(&f, &pts, &ones(5), 2, &[]).unwrap();
        assert_eq!(c.code.dimension(), 2);
        let d = c.code.min_weight(&f, &Budget::default()).unwrap().unwrap();
        assert_eq!(d, 4);
        // ell = |E| gives the full space
        let full = rs_code(&f, &pts, &ones(5), 5, &[]).unwrap();
        assert_eq!(full.code.dimension(), 5);
        // shortened: E = {1,2,3,4}, ell=2, Z={0} -> dim 1 = span of ev(X)
        let pts4: Vec<Fe> = (1..5).map(Fe).collect();
        let s = rs_code(&f, &pts4, &ones(4), 2, &[Fe(0)]).unwrap();
        assert_eq!(s.code.dimension(), 1);
        let x_eval: Vec<Fe> = pts4.clone();
        assert!(s.code.contains(&f, &x_eval));
        // overlapping roots rejected
        assert!(rs_code(&f, &pts4, &ones(4), 2, &[Fe(2)]).is_err());
    }

    #[test]
    fn rs_distance_matches_mds_up_to_len_10() {
        // brute-force minimum weight equals |E|-ell+1
        let budget = Budget::default();
        for (p, m) in [(2u64, 3usize), (11, 1), (3, 2)] {
            let f = Field::new(p, m).unwrap();
            let n = (f.size() as usize).min(10);
            let pts: Vec<Fe> = (0..n as u32).map(Fe).collect();
            for ell in 1..=n {
                let c = rs_code(&f, &pts, &ones(n), ell, &[]).unwrap();
                if let Some(d) = c.code.min_weight(&f, &budget).unwrap() {
                    assert_eq!(d, n - ell + 1, "q={} n={} ell={}", f.size(), n, ell);
                }
            }
        }
    }

    #[test]
    fn rs_dual_examples() {
        let f = Field::new(5, 1).unwrap();
        let pts: Vec<Fe> = (0..5).map(Fe).collect();
        // m=2: beta satisfies sum beta_e e^{i+j} = 0 for i<2, j<3
        let (beta, deg) = rs_dual(&f, &pts, &ones(5), 2).unwrap();
        assert_eq!(deg, 3);
        assert_eq!(beta[0], Fe::ONE);
        for i in 0..2u64 {
            for j in 0..3u64 {
                let mut acc = Fe::ZERO;
                for &e in &pts {
                    acc = f.add(acc, f.mul(beta[pts.iter().position(|&x| x == e).unwrap()], f.pow(e, i + j)));
                }
                assert!(acc.is_zero());
            }
        }
        // m=0: dual is the full space
        let (_, deg) = rs_dual(&f, &pts, &ones(5), 0).unwrap();
        assert_eq!(deg, 5);
        // m=|E|: dual is the zero code
        let (_, deg) = rs_dual(&f, &pts, &ones(5), 5).unwrap();
        assert_eq!(deg, 0);
    }

    #[test]
    fn star_products() {
        let f = Field::new(7, 1).unwrap();
        let pts: Vec<Fe> = (0..7).map(Fe).collect();
        let c = rs_code(&f, &pts, &ones(7), 2, &[]).unwrap();
        // c * all-ones = c
        let word = c.code.generator_rows(&f)[1].clone();
        assert_eq!(star_product(&f, &word, &ones(7)).unwrap(), word);
        // span_star(RS(deg<2), RS(deg<2)) = RS(deg<3)
        let prod = span_star(&f, &c.code, &c.code).unwrap();
        let expected = rs_code(&f, &pts, &ones(7), 3, &[]).unwrap();
        assert!(same_code(&f, &prod, &expected.code));
        // full * full = full
        let full = rs_code(&f, &pts, &ones(7), 7, &[]).unwrap();
        let ff = span_star(&f, &full.code, &full.code).unwrap();
        assert_eq!(ff.dimension(), 7);
    }

    #[test]
    fn shortening_identity_random_codes() {
        // ((C cap 0^A x F^{A^c})|_{A^c})^perp = C^perp|_{A^c} on random codes
        use rand::prelude::*;
        use rand_chacha::ChaCha12Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for &(p, m) in &[(2u64, 1usize), (5, 1), (2, 3)] {
            let f = Field::new(p, m).unwrap();
            let q = f.size();
            for _ in 0..8 {
                let n = rng.random_range(4..=8usize);
                let k = rng.random_range(1..n);
                let rows: Vec<Vec<Fe>> = (0..k)
                    .map(|_| (0..n).map(|_| Fe(rng.random_range(0..q) as u32)).collect())
                    .collect();
                let gen = SparseMat::from_dense(&f, &rows);
                let _code = LinearCode::from_generator(&f, gen.clone());
                let asize = rng.random_range(1..n);
                // A = first asize coordinates
                // LHS: shorten C at A then dualize on A^c
                let shortened: Vec<Vec<Fe>> = {
                    // C cap {0}^A: kernel of generator-combination rows on A
                    let coeff_constraints = SparseMat::from_rows(
                        k,
                        (0..asize)
                            .map(|col| {
                                (0..k)
                                    .map(|r| (r, gen.get(r, col)))
                                    .filter(|&(_, v)| !v.is_zero())
                                    .collect()
                            })
                            .collect(),
                    );
                    let coeffs = coeff_constraints.kernel_basis(&f);
                    coeffs
                        .iter()
                        .map(|cv| {
                            (asize..n)
                                .map(|col| {
                                    let mut acc = Fe::ZERO;
                                    for (r, &c) in cv.iter().enumerate() {
                                        acc = f.add(acc, f.mul(c, gen.get(r, col)));
                                    }
                                    acc
                                })
                                .collect::<Vec<Fe>>()
                        })
                        .collect()
                };
                let lhs_code = LinearCode::from_generator(
                    &f,
                    SparseMat::from_dense(&f, &span_basis(&f, &shortened)),
                );
                let lhs_dual_basis = if lhs_code.rank == 0 {
                    // dual of zero code = full space
                    (0..n - asize)
                        .map(|i| {
                            let mut v = vec![Fe::ZERO; n - asize];
                            v[i] = Fe::ONE;
                            v
                        })
                        .collect::<Vec<_>>()
                } else {
                    lhs_code.matrix.kernel_basis(&f)
                };
                // RHS: C^perp restricted to A^c
                let dual_basis = gen.kernel_basis(&f);
                let rhs: Vec<Vec<Fe>> =
                    dual_basis.iter().map(|v| v[asize..].to_vec()).collect();
                let rhs_code = LinearCode::from_generator(
                    &f,
                    SparseMat::from_dense(&f, &span_basis(&f, &rhs)),
                );
                let lhs_as_code = LinearCode::from_generator(
                    &f,
                    SparseMat::from_dense(&f, &span_basis(&f, &lhs_dual_basis)),
                );
                assert!(
                    same_code(&f, &lhs_as_code, &rhs_code),
                    "shortening identity failed q={} n={} k={} |A|={}",
                    q,
                    n,
                    k,
                    asize
                );
            }
        }
    }
}
