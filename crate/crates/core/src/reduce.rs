//! Alphabet and locality reductions for complexes carrying a multilinear
//! form, with every relation the reduction is supposed to satisfy re-verified
//! on the instance by oracle.

use crate::budget::Budget;
use crate::complexes::{ChainComplex, ComplexError};
use crate::field::{subfield_functional, Fe, Field, FieldError};
use crate::linalg::SparseMat;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("relation violated: {0}")]
    RelationViolated(String),
    #[error("locality labeling failed (internal)")]
    LabelingFailed,
    #[error("complexes must be 2-dimensional (3 levels), got {0} levels")]
    NotTruncated(usize),
    #[error("no root of the target modulus inside the subfield")]
    NoEmbedding,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Budget(#[from] crate::budget::BudgetExceeded),
}

/// A multilinear form given by an explicit entry list over the level-`level`
/// bases of r cochain complexes.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryForm {
    pub r: usize,
    pub slot_dims: Vec<usize>,
    pub entries: Vec<(Vec<usize>, Fe)>,
}

impl EntryForm {
    pub fn eval(&self, field: &Field, slots: &[Vec<Fe>]) -> Fe {
        assert_eq!(slots.len(), self.r);
        let mut acc = Fe::ZERO;
        for (idx, c) in &self.entries {
            let mut prod = *c;
            for (h, &i) in idx.iter().enumerate() {
                let v = slots[h][i];
                if v.is_zero() {
                    prod = Fe::ZERO;
                    break;
                }
                prod = field.mul(prod, v);
            }
            acc = field.add(acc, prod);
        }
        acc
    }

    /// Maximum left-vertex degree of the connectivity graph: how many nonzero
    /// entries any single (slot, basis index) touches.
    pub fn locality(&self) -> usize {
        let mut degree: HashMap<(usize, usize), usize> = HashMap::new();
        for (idx, c) in &self.entries {
            if c.is_zero() {
                continue;
            }
            for (h, &i) in idx.iter().enumerate() {
                *degree.entry((h, i)).or_insert(0) += 1;
            }
        }
        degree.values().copied().max().unwrap_or(0)
    }
}

/// A tuple of complexes, a form on their level-i cochains, the H' generator
/// cocycles, and the subrank certificate vectors (dense per slot).
#[derive(Debug, Clone)]
pub struct FormTriple {
    pub complexes: Vec<ChainComplex>,
    pub level: usize,
    pub form: EntryForm,
    pub hprime: Vec<Vec<Vec<Fe>>>,
    pub certificate: Vec<Vec<Vec<Fe>>>,
}

impl FormTriple {
    /// Verifies the identity pattern of the certificate under the form.
    pub fn verify_certificate(&self, field: &Field) -> Result<(), ReduceError> {
        let r = self.form.r;
        let s = self.certificate[0].len();
        let mut tuple = vec![0usize; r];
        loop {
            let slots: Vec<Vec<Fe>> = (0..r)
                .map(|h| self.certificate[h][tuple[h]].clone())
                .collect();
            let z = self.form.eval(field, &slots);
            let expected = if tuple.iter().all(|&j| j == tuple[0]) {
                Fe::ONE
            } else {
                Fe::ZERO
            };
            if z != expected {
                return Err(ReduceError::RelationViolated(format!(
                    "certificate pattern at {tuple:?}: got {z:?}"
                )));
            }
            let mut c = 0;
            loop {
                if c == r {
                    return Ok(());
                }
                tuple[c] += 1;
                if tuple[c] < s {
                    break;
                }
                tuple[c] = 0;
                c += 1;
            }
        }
    }

    /// Verifies coboundary invariance on the generator tuples by multilinear
    /// expansion: every mixed tuple with at least one basis coboundary slot
    /// vanishes.
    pub fn verify_coboundary_invariance(
        &self,
        field: &Field,
        budget: &Budget,
    ) -> Result<u64, ReduceError> {
        let r = self.form.r;
        let i = self.level;
        // coboundary generators per slot: images of level i-1 basis vectors
        let cob_gens: Vec<Vec<Vec<Fe>>> = self
            .complexes
            .iter()
            .map(|c| {
                if i == 0 {
                    return Vec::new();
                }
                let d = &c.coboundaries[i - 1];
                (0..c.dims[i - 1])
                    .map(|j| {
                        let mut v = vec![Fe::ZERO; c.dims[i - 1]];
                        v[j] = Fe::ONE;
                        d.mul_vec(field, &v)
                    })
                    .collect()
            })
            .collect();
        let mut checked = 0u64;
        for s_mask in 1u32..(1 << r) {
            let mut cost: u128 = 1;
            for h in 0..r {
                cost *= if s_mask >> h & 1 == 1 {
                    cob_gens[h].len().max(1) as u128
                } else {
                    self.hprime[h].len().max(1) as u128
                };
            }
            budget.check("generic coboundary invariance", cost)?;
            let mut choice = vec![0usize; r];
            'outer: loop {
                let mut slots: Vec<Vec<Fe>> = Vec::with_capacity(r);
                let mut skip = false;
                for h in 0..r {
                    let pool: &[Vec<Fe>] = if s_mask >> h & 1 == 1 {
                        &cob_gens[h]
                    } else {
                        &self.hprime[h]
                    };
                    if pool.is_empty() {
                        skip = true;
                        break;
                    }
                    slots.push(pool[choice[h]].clone());
                }
                if !skip {
                    let z = self.form.eval(field, &slots);
                    checked += 1;
                    if !z.is_zero() {
                        return Err(ReduceError::RelationViolated(format!(
                            "mixed tuple S={s_mask:b} choice={choice:?} gives {z:?}"
                        )));
                    }
                }
                let mut h = 0;
                loop {
                    if h == r {
                        break 'outer;
                    }
                    let cap = if s_mask >> h & 1 == 1 {
                        cob_gens[h].len()
                    } else {
                        self.hprime[h].len()
                    };
                    if cap == 0 {
                        break 'outer;
                    }
                    choice[h] += 1;
                    if choice[h] < cap {
                        break;
                    }
                    choice[h] = 0;
                    h += 1;
                }
            }
        }
        Ok(checked)
    }
}

/// Deterministic embedding of an abstract small field into the subfield of a
/// big field: maps the small generator to the least root of the small
/// modulus among subfield elements.
pub fn subfield_embedding(big: &Field, small: &Field) -> Result<Vec<Fe>, ReduceError> {
    assert_eq!(big.p(), small.p());
    let s = small.m();
    assert_eq!(big.m() % s, 0);
    // find the least root of the small modulus inside the subfield
    let eval_modulus = |x: Fe| -> Fe {
        let mut acc = Fe::ZERO;
        for (d, &c) in small.spec().modulus.iter().enumerate() {
            if c != 0 {
                acc = big.add(acc, big.mul(big.from_int(c), big.pow(x, d as u64)));
            }
        }
        acc
    };
    let root = big
        .iter()
        .find(|&x| big.in_subfield(x, s) && eval_modulus(x).is_zero())
        .ok_or(ReduceError::NoEmbedding)?;
    // small element with coords (c_0..c_{s-1}) maps to sum c_j root^j
    let table: Vec<Fe> = small
        .iter()
        .map(|x| {
            let coords = small.coords(x);
            let mut acc = Fe::ZERO;
            for (j, &c) in coords.iter().enumerate() {
                if c != 0 {
                    acc = big.add(acc, big.mul(big.from_int(c as u64), big.pow(root, j as u64)));
                }
            }
            acc
        })
        .collect();
    Ok(table)
}

/// Report of an alphabet reduction: each claimed relation, checked on the
/// instance.
#[derive(Debug, Clone)]
pub struct AlphabetReport {
    pub expansion: usize,
    pub dims_scaled: bool,
    pub cohomology_scaled: bool,
    pub cosystolic_distance_ok: bool,
    pub systolic_distance_ok: bool,
    pub complex_locality_ok: bool,
    pub form_locality_ok: bool,
    pub subrank_preserved: bool,
}

impl AlphabetReport {
    pub fn all_ok(&self) -> bool {
        self.dims_scaled
            && self.cohomology_scaled
            && self.cosystolic_distance_ok
            && self.systolic_distance_ok
            && self.complex_locality_ok
            && self.form_locality_ok
            && self.subrank_preserved
    }
}

/// Rewrites the triple over the subfield GF(p^sub_degree): bases expand by
/// m/sub_degree, the form becomes phi o zeta, and all seven claimed
/// relations are re-verified on the instance.
pub fn alphabet_reduce(
    triple: &FormTriple,
    sub_degree: usize,
    budget: &Budget,
) -> Result<(FormTriple, AlphabetReport), ReduceError> {
    let big = triple.complexes[0].field.clone();
    let m_ext = big.m() / sub_degree;
    let small = Arc::new(Field::new(big.p(), sub_degree)?);
    let embed = subfield_embedding(&big, &small)?;
    let unembed: HashMap<Fe, Fe> = embed
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, Fe(i as u32)))
        .collect();
    let phi = subfield_functional(&big, sub_degree)?;
    let to_small = |x: Fe| -> Fe {
        *unembed
            .get(&x)
            .expect("value lies in the embedded subfield")
    };
    // basis of the big field over the subfield, with basis[0] = 1
    let sf_basis = phi.basis.clone();

    // expand complexes: basis (x, j) for j in [m_ext]; an entry c at (x', x)
    // becomes the block with column j holding the expansion of c b_j
    let expand_complex = |c: &ChainComplex| -> Result<ChainComplex, ReduceError> {
        let dims: Vec<usize> = c.dims.iter().map(|&d| d * m_ext).collect();
        let labels: Vec<Vec<String>> = c
            .labels
            .iter()
            .map(|l| {
                l.iter()
                    .flat_map(|s| (0..m_ext).map(move |j| format!("{s}~{j}")))
                    .collect()
            })
            .collect();
        let mut cobs = Vec::with_capacity(c.coboundaries.len());
        for d in &c.coboundaries {
            let mut rows: Vec<Vec<(usize, Fe)>> = vec![Vec::new(); d.nrows * m_ext];
            for (rr, row) in d.rows.iter().enumerate() {
                for &(cc, v) in row {
                    for j in 0..m_ext {
                        let prod = big.mul(v, sf_basis[j]);
                        let coefs = phi.expand(&big, prod);
                        for (i, &ci) in coefs.iter().enumerate() {
                            if !ci.is_zero() {
                                rows[rr * m_ext + i].push((cc * m_ext + j, to_small(ci)));
                            }
                        }
                    }
                }
            }
            cobs.push(SparseMat { nrows: d.nrows * m_ext, ncols: d.ncols * m_ext, rows });
        }
        Ok(ChainComplex::new(small.clone(), dims, labels, cobs)?)
    };
    let new_complexes: Vec<ChainComplex> = triple
        .complexes
        .iter()
        .map(expand_complex)
        .collect::<Result<_, _>>()?;

    // expand the form: zeta~((u,j)...) = phi(c prod_h b_{j_h})
    let r = triple.form.r;
    let mut new_entries = Vec::new();
    let mut jvec = vec![0usize; r];
    for (idx, c) in &triple.form.entries {
        jvec.iter_mut().for_each(|j| *j = 0);
        loop {
            let mut val = *c;
            for &j in jvec.iter() {
                val = big.mul(val, sf_basis[j]);
            }
            let small_val = to_small(phi.apply(&big, val));
            if !small_val.is_zero() {
                let new_idx: Vec<usize> = idx
                    .iter()
                    .zip(&jvec)
                    .map(|(&u, &j)| u * m_ext + j)
                    .collect();
                new_entries.push((new_idx, small_val));
            }
            let mut h = 0;
            loop {
                if h == r {
                    break;
                }
                jvec[h] += 1;
                if jvec[h] < m_ext {
                    break;
                }
                jvec[h] = 0;
                h += 1;
            }
            if jvec.iter().all(|&j| j == 0) {
                break;
            }
        }
    }
    let new_form = EntryForm {
        r,
        slot_dims: triple.form.slot_dims.iter().map(|&d| d * m_ext).collect(),
        entries: new_entries,
    };

    // expand a dense vector over the big field into subfield coordinates
    let expand_vec = |v: &[Fe]| -> Vec<Fe> {
        let mut out = Vec::with_capacity(v.len() * m_ext);
        for &x in v {
            for c in phi.expand(&big, x) {
                out.push(to_small(c));
            }
        }
        out
    };
    let new_hprime: Vec<Vec<Vec<Fe>>> = triple
        .hprime
        .iter()
        .map(|gens| {
            let mut out = Vec::new();
            for z in gens {
                for &b in &sf_basis {
                    let scaled: Vec<Fe> = z.iter().map(|&x| big.mul(b, x)).collect();
                    out.push(expand_vec(&scaled));
                }
            }
            out
        })
        .collect();
    let new_cert: Vec<Vec<Vec<Fe>>> = triple
        .certificate
        .iter()
        .map(|vs| vs.iter().map(|v| expand_vec(v)).collect())
        .collect();
    let new_triple = FormTriple {
        complexes: new_complexes,
        level: triple.level,
        form: new_form,
        hprime: new_hprime,
        certificate: new_cert,
    };

    // the seven relations
    let i = triple.level;
    let dims_scaled = triple
        .complexes
        .iter()
        .zip(&new_triple.complexes)
        .all(|(a, b)| b.dims[i] == m_ext * a.dims[i]);
    let cohomology_scaled = triple
        .complexes
        .iter()
        .zip(&new_triple.complexes)
        .all(|(a, b)| b.cohomology_dim(i) == m_ext * a.cohomology_dim(i));
    let mut cosys_ok = true;
    let mut sys_ok = true;
    for (a, b) in triple.complexes.iter().zip(&new_triple.complexes) {
        let da = a.cosystolic_distance(i, budget)?;
        let db = b.cosystolic_distance(i, budget)?;
        cosys_ok &= match (da, db) {
            (None, _) => true,
            (Some(_), None) => true,
            (Some(x), Some(y)) => y >= x,
        };
        let da = a.systolic_distance(i, budget)?;
        let db = b.systolic_distance(i, budget)?;
        sys_ok &= match (da, db) {
            (None, _) => true,
            (Some(_), None) => true,
            (Some(x), Some(y)) => y >= x,
        };
    }
    let complex_locality_ok = triple
        .complexes
        .iter()
        .zip(&new_triple.complexes)
        .all(|(a, b)| b.locality() <= m_ext * a.locality());
    let form_locality_ok = new_triple.form.locality()
        <= m_ext.pow((r - 1) as u32) * triple.form.locality().max(1);
    let subrank_preserved = new_triple.verify_certificate(&small).is_ok();
    let report = AlphabetReport {
        expansion: m_ext,
        dims_scaled,
        cohomology_scaled,
        cosystolic_distance_ok: cosys_ok,
        systolic_distance_ok: sys_ok,
        complex_locality_ok,
        form_locality_ok,
        subrank_preserved,
    };
    Ok((new_triple, report))
}

/// Report of a locality reduction.
#[derive(Debug, Clone)]
pub struct LocalityReport {
    pub w: usize,
    pub dims_scaled: bool,
    pub cohomology_equal: bool,
    pub cosystolic_distance_scaled: bool,
    pub systolic_distance_ok: bool,
    pub complex_locality_ok: bool,
    pub form_locality_one: bool,
    pub subrank_preserved: bool,
}

impl LocalityReport {
    pub fn all_ok(&self) -> bool {
        self.dims_scaled
            && self.cohomology_equal
            && self.cosystolic_distance_scaled
            && self.systolic_distance_ok
            && self.complex_locality_ok
            && self.form_locality_one
            && self.subrank_preserved
    }
}

/// Concatenates each complex with a classical repetition code of length
/// w = locality(form), decongesting the form so every expanded basis element
/// appears in at most one term. Requires 2-dimensional complexes.
pub fn locality_reduce(
    triple: &FormTriple,
    budget: &Budget,
) -> Result<(FormTriple, LocalityReport), ReduceError> {
    let field = triple.complexes[0].field.clone();
    for c in &triple.complexes {
        if c.dims.len() != 3 {
            return Err(ReduceError::NotTruncated(c.dims.len()));
        }
    }
    if triple.level != 1 {
        return Err(ReduceError::NotTruncated(triple.level));
    }
    let w = triple.form.locality().max(1);
    let r = triple.form.r;

    // edge labels of the connectivity graph: per (slot, basis), each incident
    // entry gets a distinct copy in [w]
    let mut next_label: HashMap<(usize, usize), usize> = HashMap::new();
    let mut entry_labels: Vec<Vec<usize>> = Vec::with_capacity(triple.form.entries.len());
    for (idx, c) in &triple.form.entries {
        if c.is_zero() {
            entry_labels.push(vec![0; r]);
            continue;
        }
        let mut labels = Vec::with_capacity(r);
        for (h, &u) in idx.iter().enumerate() {
            let slot = next_label.entry((h, u)).or_insert(0);
            if *slot >= w {
                return Err(ReduceError::LabelingFailed);
            }
            labels.push(*slot);
            *slot += 1;
        }
        entry_labels.push(labels);
    }

    // expanded complexes: C~^0 = C^0, C~^1 = C^1 (x) F^w,
    // C~^2 = C^2 (+) (C^1 (x) F^{w-1})
    let expand_complex = |c: &ChainComplex| -> Result<ChainComplex, ReduceError> {
        let d0 = &c.coboundaries[0];
        let d1 = &c.coboundaries[1];
        let n0 = c.dims[0];
        let n1 = c.dims[1];
        let n2 = c.dims[2];
        let dims = vec![n0, n1 * w, n2 + n1 * (w - 1)];
        let labels = vec![
            c.labels[0].clone(),
            c.labels[1]
                .iter()
                .flat_map(|s| (0..w).map(move |j| format!("{s}~{j}")))
                .collect(),
            c.labels[2]
                .iter()
                .cloned()
                .chain(
                    c.labels[1]
                        .iter()
                        .flat_map(|s| (0..w - 1).map(move |j| format!("{s}~rep{j}"))),
                )
                .collect(),
        ];
        // delta~_0 = delta_0 (x) all-ones
        let mut rows0: Vec<Vec<(usize, Fe)>> = vec![Vec::new(); n1 * w];
        for (rr, row) in d0.rows.iter().enumerate() {
            for &(cc, v) in row {
                for j in 0..w {
                    rows0[rr * w + j].push((cc, v));
                }
            }
        }
        // delta~_1 = (delta_1 (x) first-copy) stacked over (I (x) delta_rep)
        let mut rows1: Vec<Vec<(usize, Fe)>> = vec![Vec::new(); n2 + n1 * (w - 1)];
        for (rr, row) in d1.rows.iter().enumerate() {
            for &(cc, v) in row {
                rows1[rr].push((cc * w, v));
            }
        }
        for u in 0..n1 {
            for j in 0..w - 1 {
                let target = n2 + u * (w - 1) + j;
                rows1[target].push((u * w + j, Fe::ONE));
                rows1[target].push((u * w + j + 1, field.neg(Fe::ONE)));
            }
        }
        Ok(ChainComplex::new(
            field.clone(),
            dims,
            labels,
            vec![
                SparseMat { nrows: n1 * w, ncols: n0, rows: rows0 },
                SparseMat { nrows: n2 + n1 * (w - 1), ncols: n1 * w, rows: rows1 },
            ],
        )?)
    };
    let new_complexes: Vec<ChainComplex> = triple
        .complexes
        .iter()
        .map(expand_complex)
        .collect::<Result<_, _>>()?;

    // decongested form: entry (u_h)_h becomes ((u_h, label_h))_h
    let new_entries: Vec<(Vec<usize>, Fe)> = triple
        .form
        .entries
        .iter()
        .zip(&entry_labels)
        .filter(|((_, c), _)| !c.is_zero())
        .map(|((idx, c), labels)| {
            let new_idx: Vec<usize> = idx
                .iter()
                .zip(labels)
                .map(|(&u, &j)| u * w + j)
                .collect();
            (new_idx, *c)
        })
        .collect();
    let new_form = EntryForm {
        r,
        slot_dims: triple.form.slot_dims.iter().map(|&d| d * w).collect(),
        entries: new_entries,
    };
    // cochain copy map: v -> v (x) all-ones
    let copy_vec = |v: &[Fe]| -> Vec<Fe> {
        let mut out = Vec::with_capacity(v.len() * w);
        for &x in v {
            for _ in 0..w {
                out.push(x);
            }
        }
        out
    };
    let new_triple = FormTriple {
        complexes: new_complexes,
        level: 1,
        form: new_form,
        hprime: triple
            .hprime
            .iter()
            .map(|gens| gens.iter().map(|z| copy_vec(z)).collect())
            .collect(),
        certificate: triple
            .certificate
            .iter()
            .map(|vs| vs.iter().map(|v| copy_vec(v)).collect())
            .collect(),
    };

    // relations
    let dims_scaled = triple
        .complexes
        .iter()
        .zip(&new_triple.complexes)
        .all(|(a, b)| b.dims[1] == w * a.dims[1]);
    let cohomology_equal = triple
        .complexes
        .iter()
        .zip(&new_triple.complexes)
        .all(|(a, b)| b.cohomology_dim(1) == a.cohomology_dim(1));
    let mut cosys_scaled = true;
    let mut sys_ok = true;
    for (a, b) in triple.complexes.iter().zip(&new_triple.complexes) {
        let da = a.cosystolic_distance(1, budget)?;
        let db = b.cosystolic_distance(1, budget)?;
        cosys_scaled &= match (da, db) {
            (None, None) => true,
            (Some(x), Some(y)) => y == w * x,
            _ => false,
        };
        let da = a.systolic_distance(1, budget)?;
        let db = b.systolic_distance(1, budget)?;
        sys_ok &= match (da, db) {
            (None, _) => true,
            (Some(_), None) => true,
            (Some(x), Some(y)) => y >= x,
        };
    }
    let complex_locality_ok = triple
        .complexes
        .iter()
        .zip(&new_triple.complexes)
        .all(|(a, b)| b.locality() <= (w * a.locality()).max(a.locality() + 2));
    let form_locality_one = new_triple.form.locality() <= 1;
    let subrank_preserved = new_triple.verify_certificate(&field).is_ok();
    let report = LocalityReport {
        w,
        dims_scaled,
        cohomology_equal,
        cosystolic_distance_scaled: cosys_scaled,
        systolic_distance_ok: sys_ok,
        complex_locality_ok,
        form_locality_one,
        subrank_preserved,
    };
    Ok((new_triple, report))
}
