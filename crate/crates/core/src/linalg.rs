//! Sparse exact linear algebra over GF(q): rank, kernel, solve, products.
//!
//! Ranks use fraction-free elimination with partial pivoting by (static)
//! column weight to limit fill-in; kernels and solves use a plain
//! deterministic reduced echelon form.

use crate::field::{Fe, Field};
use serde::{Deserialize, Serialize};

/// Row-major sparse matrix over a field. Rows hold strictly increasing column
/// indices with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMat {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, Fe)>>,
}

impl SparseMat {
    pub fn zero(nrows: usize, ncols: usize) -> SparseMat {
        SparseMat { nrows, ncols, rows: vec![Vec::new(); nrows] }
    }

    pub fn identity(n: usize) -> SparseMat {
        SparseMat {
            nrows: n,
            ncols: n,
            rows: (0..n).map(|i| vec![(i, Fe::ONE)]).collect(),
        }
    }

    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, Fe)>>) -> SparseMat {
        let mut m = SparseMat { nrows: rows.len(), ncols, rows };
        for row in &mut m.rows {
            row.retain(|&(_, v)| !v.is_zero());
            row.sort_by_key(|&(c, _)| c);
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            debug_assert!(row.iter().all(|&(c, _)| c < ncols));
        }
        m
    }

    pub fn from_dense(field: &Field, rows: &[Vec<Fe>]) -> SparseMat {
        let _ = field;
        let ncols = rows.first().map_or(0, |r| r.len());
        SparseMat {
            nrows: rows.len(),
            ncols,
            rows: rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(c, &v)| (c, v))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Fe>> {
        let mut out = vec![vec![Fe::ZERO; self.ncols]; self.nrows];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out[r][c] = v;
            }
        }
        out
    }

    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.rows[r]
            .binary_search_by_key(&c, |&(col, _)| col)
            .map(|i| self.rows[r][i].1)
            .unwrap_or(Fe::ZERO)
    }

    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        let row = &mut self.rows[r];
        match row.binary_search_by_key(&c, |&(col, _)| col) {
            Ok(i) => {
                if v.is_zero() {
                    row.remove(i);
                } else {
                    row[i].1 = v;
                }
            }
            Err(i) => {
                if !v.is_zero() {
                    row.insert(i, (c, v));
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn transpose(&self) -> SparseMat {
        let mut rows = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                rows[c].push((r, v));
            }
        }
        SparseMat { nrows: self.ncols, ncols: self.nrows, rows }
    }

    /// Maximum number of nonzero entries in any row or column.
    pub fn locality(&self) -> usize {
        let row_max = self.rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut col_weight = vec![0usize; self.ncols];
        for row in &self.rows {
            for &(c, _) in row {
                col_weight[c] += 1;
            }
        }
        row_max.max(col_weight.into_iter().max().unwrap_or(0))
    }

    /// Matrix product self * other.
    pub fn mul(&self, field: &Field, other: &SparseMat) -> SparseMat {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in matrix product");
        let mut rows = Vec::with_capacity(self.nrows);
        for row in &self.rows {
            let mut acc: std::collections::BTreeMap<usize, Fe> = Default::default();
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    let e = acc.entry(c).or_insert(Fe::ZERO);
                    *e = field.add(*e, field.mul(a, b));
                }
            }
            rows.push(acc.into_iter().filter(|&(_, v)| !v.is_zero()).collect());
        }
        SparseMat { nrows: self.nrows, ncols: other.ncols, rows }
    }

    /// self * x for a dense vector x.
    pub fn mul_vec(&self, field: &Field, x: &[Fe]) -> Vec<Fe> {
        assert_eq!(self.ncols, x.len());
        self.rows
            .iter()
            .map(|row| {
                let mut acc = Fe::ZERO;
                for &(c, v) in row {
                    acc = field.add(acc, field.mul(v, x[c]));
                }
                acc
            })
            .collect()
    }

    /// Sparse application: returns self * x as sorted sparse pairs. Walks
    /// every row with a merge join; O(nnz) overall, fine at this scale.
    pub fn mul_sparse_vec(&self, field: &Field, x: &[(usize, Fe)]) -> Vec<(usize, Fe)> {
        let mut acc: std::collections::BTreeMap<usize, Fe> = Default::default();
        for (r, row) in self.rows.iter().enumerate() {
            let mut sum = Fe::ZERO;
            let mut i = 0;
            let mut j = 0;
            while i < row.len() && j < x.len() {
                match row[i].0.cmp(&x[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        sum = field.add(sum, field.mul(row[i].1, x[j].1));
                        i += 1;
                        j += 1;
                    }
                }
            }
            if !sum.is_zero() {
                acc.insert(r, sum);
            }
        }
        acc.into_iter().collect()
    }

    /// Vertical stack.
    pub fn vstack(&self, other: &SparseMat) -> SparseMat {
        assert_eq!(self.ncols, other.ncols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        SparseMat { nrows: self.nrows + other.nrows, ncols: self.ncols, rows }
    }

    /// Rank via sparse elimination. Pivot columns are chosen by least static
    /// column weight (ties by index) within each row.
    pub fn rank(&self, field: &Field) -> usize {
        let mut col_weight = vec![0usize; self.ncols];
        for row in &self.rows {
            for &(c, _) in row {
                col_weight[c] += 1;
            }
        }
        // pivots: col -> normalized row
        let mut pivots: std::collections::HashMap<usize, Vec<(usize, Fe)>> = Default::default();
        for row in &self.rows {
            let mut cur: std::collections::BTreeMap<usize, Fe> =
                row.iter().copied().collect();
            loop {
                // reduce against existing pivots; entries can appear and
                // vanish mid-pass, so re-read each column before using it
                let mut reduced = false;
                let cols: Vec<usize> = cur.keys().copied().collect();
                for c in cols {
                    let Some(&factor) = cur.get(&c) else { continue };
                    if let Some(p) = pivots.get(&c) {
                        for &(pc, pv) in p {
                            let entry = cur.entry(pc).or_insert(Fe::ZERO);
                            *entry = field.sub(*entry, field.mul(factor, pv));
                            if entry.is_zero() {
                                cur.remove(&pc);
                            }
                        }
                        debug_assert!(!cur.contains_key(&c));
                        reduced = true;
                    }
                }
                if !reduced {
                    break;
                }
            }
            if cur.is_empty() {
                continue;
            }
            // choose pivot column by least weight
            let (&pc, _) = cur
                .iter()
                .min_by_key(|(&c, _)| (col_weight[c], c))
                .expect("nonempty");
            let inv = field.inv(cur[&pc]).expect("nonzero pivot");
            let normalized: Vec<(usize, Fe)> =
                cur.iter().map(|(&c, &v)| (c, field.mul(inv, v))).collect();
            pivots.insert(pc, normalized);
        }
        pivots.len()
    }

    /// Reduced row echelon form; returns (rref rows, pivot column per row).
    pub fn rref(&self, field: &Field) -> (Vec<Vec<(usize, Fe)>>, Vec<usize>) {
        let mut echelon: Vec<(usize, std::collections::BTreeMap<usize, Fe>)> = Vec::new();
        for row in &self.rows {
            let mut cur: std::collections::BTreeMap<usize, Fe> = row.iter().copied().collect();
            for (pc, prow) in &echelon {
                if let Some(&factor) = cur.get(pc) {
                    for (&c, &v) in prow {
                        let e = cur.entry(c).or_insert(Fe::ZERO);
                        *e = field.sub(*e, field.mul(factor, v));
                        if e.is_zero() {
                            cur.remove(&c);
                        }
                    }
                }
            }
            if let Some((&pc, &pv)) = cur.iter().next() {
                let inv = field.inv(pv).expect("nonzero");
                let normalized: std::collections::BTreeMap<usize, Fe> =
                    cur.iter().map(|(&c, &v)| (c, field.mul(inv, v))).collect();
                // back-substitute into earlier rows
                for (_, prow) in echelon.iter_mut() {
                    if let Some(&factor) = prow.get(&pc) {
                        for (&c, &v) in &normalized {
                            let e = prow.entry(c).or_insert(Fe::ZERO);
                            *e = field.sub(*e, field.mul(factor, v));
                            if e.is_zero() {
                                prow.remove(&c);
                            }
                        }
                    }
                }
                echelon.push((pc, normalized));
            }
        }
        echelon.sort_by_key(|&(pc, _)| pc);
        let pivot_cols: Vec<usize> = echelon.iter().map(|&(pc, _)| pc).collect();
        let rows = echelon
            .into_iter()
            .map(|(_, r)| r.into_iter().collect())
            .collect();
        (rows, pivot_cols)
    }

    /// Basis of the right kernel {x : self * x = 0}.
    pub fn kernel_basis(&self, field: &Field) -> Vec<Vec<Fe>> {
        let (rref, pivot_cols) = self.rref(field);
        let pivot_of_col: std::collections::HashMap<usize, usize> =
            pivot_cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if pivot_of_col.contains_key(&free) {
                continue;
            }
            let mut v = vec![Fe::ZERO; self.ncols];
            v[free] = Fe::ONE;
            for (i, &pc) in pivot_cols.iter().enumerate() {
                // rref row i: x_pc + sum coeff * x_free = 0
                let coeff = rref[i]
                    .iter()
                    .find(|&&(c, _)| c == free)
                    .map(|&(_, val)| val)
                    .unwrap_or(Fe::ZERO);
                v[pc] = field.neg(coeff);
            }
            basis.push(v);
        }
        basis
    }

    /// Solves self * x = b; returns any particular solution.
    pub fn solve(&self, field: &Field, b: &[Fe]) -> Option<Vec<Fe>> {
        assert_eq!(b.len(), self.nrows);
        // augmented RREF
        let mut aug = self.clone();
        aug.ncols += 1;
        for (r, row) in aug.rows.iter_mut().enumerate() {
            if !b[r].is_zero() {
                row.push((self.ncols, b[r]));
            }
        }
        let (rref, pivot_cols) = aug.rref(field);
        let mut x = vec![Fe::ZERO; self.ncols];
        for (i, &pc) in pivot_cols.iter().enumerate() {
            if pc == self.ncols {
                return None; // inconsistent
            }
            let rhs = rref[i]
                .iter()
                .find(|&&(c, _)| c == self.ncols)
                .map(|&(_, v)| v)
                .unwrap_or(Fe::ZERO);
            x[pc] = rhs;
        }
        debug_assert_eq!(self.mul_vec(field, &x), b.to_vec());
        Some(x)
    }

    /// True iff v lies in the row space.
    pub fn row_space_contains(&self, field: &Field, v: &[Fe]) -> bool {
        assert_eq!(v.len(), self.ncols);
        let r0 = self.rank(field);
        let mut ext = self.clone();
        ext.rows.push(
            v.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(c, &x)| (c, x))
                .collect(),
        );
        ext.nrows += 1;
        ext.rank(field) == r0
    }
}

/// Row-reduces a list of dense vectors to a basis of their span.
pub fn span_basis(field: &Field, vectors: &[Vec<Fe>]) -> Vec<Vec<Fe>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = SparseMat::from_dense(field, vectors);
    let (rref, _) = m.rref(field);
    rref.into_iter()
        .map(|row| {
            let mut v = vec![Fe::ZERO; vectors[0].len()];
            for (c, val) in row {
                v[c] = val;
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> Field {
        Field::new(p, 1).unwrap()
    }

    #[test]
    fn rank_and_kernel_small() {
        let f = gf(5);
        let m = SparseMat::from_dense(
            &f,
            &[
                vec![Fe(1), Fe(2), Fe(3)],
                vec![Fe(0), Fe(1), Fe(1)],
                vec![Fe(1), Fe(3), Fe(4)],
            ],
        );
        // row3 = row1 + row2 mod 5
        assert_eq!(m.rank(&f), 2);
        let ker = m.kernel_basis(&f);
        assert_eq!(ker.len(), 1);
        for v in &ker {
            assert!(m.mul_vec(&f, v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let f = gf(7);
        let m = SparseMat::from_dense(&f, &[vec![Fe(1), Fe(1)], vec![Fe(2), Fe(2)]]);
        assert!(m.solve(&f, &[Fe(3), Fe(6)]).is_some());
        assert!(m.solve(&f, &[Fe(3), Fe(5)]).is_none());
    }

    #[test]
    fn transpose_product_identity() {
        let f = gf(3);
        let m = SparseMat::from_dense(&f, &[vec![Fe(1), Fe(2), Fe(0)], vec![Fe(0), Fe(1), Fe(1)]]);
        let t = m.transpose();
        assert_eq!(t.nrows, 3);
        assert_eq!(t.get(1, 0), Fe(2));
        let id = SparseMat::identity(3);
        assert_eq!(m.mul(&f, &id), m);
    }

    #[test]
    fn locality_counts_rows_and_cols() {
        let f = gf(2);
        let m = SparseMat::from_dense(
            &f,
            &[vec![Fe(1), Fe(1), Fe(1)], vec![Fe(1), Fe(0), Fe(0)]],
        );
        assert_eq!(m.locality(), 3);
        assert_eq!(SparseMat::zero(4, 4).locality(), 0);
    }
}
