//! Chain complexes over GF(q) with chosen bases: incidence complexes, local
//! coefficient systems, Sipser-Spielman complexes, tensor and balanced
//! products, and the homology / distance / expansion oracles.

use crate::budget::{Budget, BudgetExceeded};
use crate::field::{Fe, Field};
use crate::graph::MultiGraph;
use crate::linalg::SparseMat;
use crate::spectral::GroupShape;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("boundary composition is nonzero between levels {0} and {1}")]
    BoundaryComposition(usize, usize),
    #[error("level {0} out of range")]
    BadLevel(usize),
    #[error("labels at level {0} are not unique")]
    DuplicateLabels(usize),
    #[error("matrix shape mismatch at level {0}")]
    ShapeMismatch(usize),
    #[error("local system composition law violated at element {0} of level {1}")]
    CompositionLawViolated(usize, usize),
    #[error("local matrix at vertex {0} is rank deficient")]
    RankDeficient(usize),
    #[error("graph is not regular")]
    NotRegular,
    #[error("incidence entries must lie in -1..=1")]
    BadIncidence,
    #[error("group action is not free (element {0} fixes basis element {1})")]
    ActionNotFree(u64, usize),
    #[error("group action does not respect boundary maps")]
    ActionBoundaryMismatch,
    #[error("actions live over different groups")]
    GroupMismatch,
    #[error("expansion is undefined: every chain at this level is a (co)cycle")]
    ExpansionUndefined,
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// Exact nonnegative rational, compared by cross multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Ratio {
        assert!(den > 0);
        Ratio { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

/// Distance value: finite weight or the infinite sentinel (empty minimization).
pub type Distance = Option<usize>;

/// A chain complex over GF(q) with fixed bases. Coboundary maps
/// `delta_i : level i -> level i+1` are stored; boundary maps are their
/// transposes.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    pub field: Arc<Field>,
    pub dims: Vec<usize>,
    pub labels: Vec<Vec<String>>,
    pub coboundaries: Vec<SparseMat>,
}

impl ChainComplex {
    /// Builds and validates: shapes agree, labels unique, delta delta = 0.
    pub fn new(
        field: Arc<Field>,
        dims: Vec<usize>,
        labels: Vec<Vec<String>>,
        coboundaries: Vec<SparseMat>,
    ) -> Result<ChainComplex, ComplexError> {
        assert_eq!(dims.len(), labels.len());
        assert_eq!(coboundaries.len() + 1, dims.len());
        for (i, l) in labels.iter().enumerate() {
            if l.len() != dims[i] {
                return Err(ComplexError::ShapeMismatch(i));
            }
            let set: std::collections::HashSet<&String> = l.iter().collect();
            if set.len() != l.len() {
                return Err(ComplexError::DuplicateLabels(i));
            }
        }
        for (i, d) in coboundaries.iter().enumerate() {
            if d.nrows != dims[i + 1] || d.ncols != dims[i] {
                return Err(ComplexError::ShapeMismatch(i));
            }
        }
        let c = ChainComplex { field, dims, labels, coboundaries };
        c.verify_dd_zero()?;
        Ok(c)
    }

    /// Number of levels minus one.
    pub fn dimension(&self) -> usize {
        self.dims.len() - 1
    }

    /// delta_i : level i -> level i+1 (absent outside range).
    pub fn delta(&self, i: usize) -> Option<&SparseMat> {
        self.coboundaries.get(i)
    }

    /// Checks delta_{i+1} delta_i = 0 exactly, streaming column by column.
    pub fn verify_dd_zero(&self) -> Result<(), ComplexError> {
        for i in 0..self.coboundaries.len().saturating_sub(1) {
            let lo = &self.coboundaries[i];
            let hi = &self.coboundaries[i + 1];
            let lo_t = lo.transpose();
            for col in 0..lo.ncols {
                let image = &lo_t.rows[col]; // delta_i of basis vector `col`
                let twice = hi.mul_sparse_vec(&self.field, image);
                if !twice.is_empty() {
                    return Err(ComplexError::BoundaryComposition(i, i + 1));
                }
            }
        }
        Ok(())
    }

    pub fn rank_delta(&self, i: usize) -> usize {
        self.coboundaries.get(i).map_or(0, |d| d.rank(&self.field))
    }

    /// dim H_i = dim ker(partial_i) - rank(partial_{i+1}).
    pub fn homology_dim(&self, i: usize) -> usize {
        let dim = self.dims[i];
        let rank_partial_i = if i == 0 { 0 } else { self.rank_delta(i - 1) };
        let rank_partial_ip1 = self.rank_delta(i);
        dim - rank_partial_i - rank_partial_ip1
    }

    /// dim H^i = dim ker(delta_i) - rank(delta_{i-1}); agrees with
    /// `homology_dim` at every level.
    pub fn cohomology_dim(&self, i: usize) -> usize {
        let dim = self.dims[i];
        let rank_delta_i = self.rank_delta(i);
        let rank_delta_im1 = if i == 0 { 0 } else { self.rank_delta(i - 1) };
        dim - rank_delta_i - rank_delta_im1
    }

    /// Maximum row/column weight over all boundary maps.
    pub fn locality(&self) -> usize {
        self.coboundaries.iter().map(|d| d.locality()).max().unwrap_or(0)
    }

    /// Euler characteristic sum (-1)^i dim_i.
    pub fn euler_characteristic(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(i, &d)| if i % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// Kernel basis of partial_i (the i-cycles).
    pub fn cycle_basis(&self, i: usize) -> Vec<Vec<Fe>> {
        if i == 0 {
            // partial_0 = 0: everything is a cycle
            return identity_basis(self.dims[0]);
        }
        let partial = self.coboundaries[i - 1].transpose();
        partial.kernel_basis(&self.field)
    }

    /// Kernel basis of delta_i (the i-cocycles).
    pub fn cocycle_basis(&self, i: usize) -> Vec<Vec<Fe>> {
        match self.coboundaries.get(i) {
            None => identity_basis(self.dims[i]),
            Some(d) => d.kernel_basis(&self.field),
        }
    }

    /// Generator matrix of the i-boundaries B_i = im(partial_{i+1}): the rows
    /// of delta_i span it.
    pub fn boundary_span(&self, i: usize) -> SparseMat {
        match self.coboundaries.get(i) {
            None => SparseMat::zero(0, self.dims[i]),
            Some(d) => d.clone(),
        }
    }

    /// Generator matrix of the i-coboundaries B^i = im(delta_{i-1}): the
    /// columns of delta_{i-1}, i.e. rows of its transpose.
    pub fn coboundary_span(&self, i: usize) -> SparseMat {
        if i == 0 {
            SparseMat::zero(0, self.dims[0])
        } else {
            self.coboundaries[i - 1].transpose()
        }
    }

    /// Exact i-systolic distance: min weight over Z_i minus B_i; None when
    /// H_i = 0 (empty minimization).
    pub fn systolic_distance(&self, i: usize, budget: &Budget) -> Result<Distance, ComplexError> {
        let cycles = self.cycle_basis(i);
        let bspan = self.boundary_span(i);
        min_weight_outside(&self.field, &cycles, &bspan, budget)
    }

    /// Exact i-cosystolic distance over Z^i minus B^i.
    pub fn cosystolic_distance(&self, i: usize, budget: &Budget) -> Result<Distance, ComplexError> {
        let cocycles = self.cocycle_basis(i);
        let bspan = self.coboundary_span(i);
        min_weight_outside(&self.field, &cocycles, &bspan, budget)
    }

    /// Largest w such that no element of Z_i \ B_i has weight <= w, verified
    /// by weight-bounded support enumeration up to `max_w`.
    pub fn systolic_distance_lower_bound(
        &self,
        i: usize,
        max_w: usize,
        budget: &Budget,
    ) -> Result<usize, ComplexError> {
        let n = self.dims[i];
        let partial = if i == 0 {
            SparseMat::zero(0, n)
        } else {
            self.coboundaries[i - 1].transpose()
        };
        let bspan = self.boundary_span(i);
        for w in 1..=max_w.min(n) {
            budget.check("weight-bounded distance", binomial(n, w))?;
            let mut found = false;
            for_each_subset(n, w, |support| {
                if found {
                    return;
                }
                if exists_cycle_on_support(&self.field, &partial, &bspan, support, n) {
                    found = true;
                }
            });
            if found {
                return Ok(w - 1);
            }
        }
        Ok(max_w.min(n))
    }

    /// Exact i-cocycle expansion rho^i = min over non-cocycles c of
    /// |delta_i(c)| / dist(c, Z^i). Exhaustive within budget.
    pub fn cocycle_expansion(&self, i: usize, budget: &Budget) -> Result<Ratio, ComplexError> {
        let delta = match self.coboundaries.get(i) {
            None => return Err(ComplexError::ExpansionUndefined),
            Some(d) => d.clone(),
        };
        expansion_exhaustive(&self.field, self.dims[i], &delta, budget)
    }

    /// Exact i-cycle expansion rho_i on the chain side (partial_i).
    pub fn cycle_expansion(&self, i: usize, budget: &Budget) -> Result<Ratio, ComplexError> {
        if i == 0 || i > self.coboundaries.len() {
            return Err(ComplexError::ExpansionUndefined);
        }
        let partial = self.coboundaries[i - 1].transpose();
        expansion_exhaustive(&self.field, self.dims[i], &partial, budget)
    }
}

fn identity_basis(n: usize) -> Vec<Vec<Fe>> {
    (0..n)
        .map(|i| {
            let mut v = vec![Fe::ZERO; n];
            v[i] = Fe::ONE;
            v
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
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

/// Is there a cycle (kernel vector of `partial`) supported inside `support`
/// that is not in the row space of `bspan`?
fn exists_cycle_on_support(
    field: &Field,
    partial: &SparseMat,
    bspan: &SparseMat,
    support: &[usize],
    n: usize,
) -> bool {
    // restrict partial to the support columns
    let col_of: HashMap<usize, usize> = support.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let rows: Vec<Vec<(usize, Fe)>> = partial
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .filter_map(|&(c, v)| col_of.get(&c).map(|&nc| (nc, v)))
                .collect()
        })
        .collect();
    let restricted = SparseMat { nrows: partial.nrows, ncols: support.len(), rows };
    let kernel = restricted.kernel_basis(field);
    for kv in &kernel {
        let mut full = vec![Fe::ZERO; n];
        for (j, &c) in support.iter().enumerate() {
            full[c] = kv[j];
        }
        if !bspan.row_space_contains(field, &full) {
            return true;
        }
    }
    false
}

/// Minimum weight over span(basis) \ rowspace(excluded); None if empty.
fn min_weight_outside(
    field: &Field,
    basis: &[Vec<Fe>],
    excluded: &SparseMat,
    budget: &Budget,
) -> Result<Distance, ComplexError> {
    let k = basis.len();
    if k == 0 {
        return Ok(None);
    }
    let q = field.size();
    let combos = Budget::power(q, k);
    budget.check("coset minimum-weight enumeration", combos)?;
    // precompute an rref of the excluded space for fast membership
    let (exc_rref, exc_pivots) = excluded.rref(field);
    let in_excluded = |v: &[Fe]| -> bool {
        let mut cur: std::collections::BTreeMap<usize, Fe> = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(c, &x)| (c, x))
            .collect();
        for (i, &pc) in exc_pivots.iter().enumerate() {
            if let Some(&factor) = cur.get(&pc) {
                for &(c, val) in &exc_rref[i] {
                    let e = cur.entry(c).or_insert(Fe::ZERO);
                    *e = field.sub(*e, field.mul(factor, val));
                    if e.is_zero() {
                        cur.remove(&c);
                    }
                }
            }
        }
        cur.is_empty()
    };
    let n = basis[0].len();
    let mut best: Distance = None;
    let mut coeffs = vec![Fe::ZERO; k];
    for idx in 1..combos {
        let mut rem = idx;
        for c in coeffs.iter_mut() {
            *c = Fe((rem % q as u128) as u32);
            rem /= q as u128;
        }
        let mut v = vec![Fe::ZERO; n];
        for (bi, &c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                for (j, &x) in basis[bi].iter().enumerate() {
                    v[j] = field.add(v[j], field.mul(c, x));
                }
            }
        }
        let w = v.iter().filter(|x| !x.is_zero()).count();
        if w == 0 {
            continue;
        }
        if best.is_some_and(|b| w >= b) {
            continue;
        }
        if !in_excluded(&v) {
            best = Some(w);
        }
    }
    Ok(best)
}

/// min over c not in ker(map) of |map c| / dist(c, ker(map)), fully
/// enumerated. `map` has `n` columns.
fn expansion_exhaustive(
    field: &Field,
    n: usize,
    map: &SparseMat,
    budget: &Budget,
) -> Result<Ratio, ComplexError> {
    let q = field.size();
    let words = Budget::power(q, n);
    let kernel = map.kernel_basis(field);
    let kvecs = Budget::power(q, kernel.len());
    budget.check("expansion enumeration", words.saturating_mul(kvecs.max(1)))?;
    if kernel.len() == n {
        return Err(ComplexError::ExpansionUndefined);
    }
    // materialize the kernel subspace
    let mut kernel_elems: Vec<Vec<Fe>> = Vec::with_capacity(kvecs as usize);
    let mut coeffs = vec![Fe::ZERO; kernel.len()];
    for idx in 0..kvecs {
        let mut rem = idx;
        for c in coeffs.iter_mut() {
            *c = Fe((rem % q as u128) as u32);
            rem /= q as u128;
        }
        let mut v = vec![Fe::ZERO; n];
        for (bi, &c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                for (j, &x) in kernel[bi].iter().enumerate() {
                    v[j] = field.add(v[j], field.mul(c, x));
                }
            }
        }
        kernel_elems.push(v);
    }
    let mut best: Option<Ratio> = None;
    let mut word = vec![Fe::ZERO; n];
    for idx in 0..words {
        let mut rem = idx;
        for c in word.iter_mut() {
            *c = Fe((rem % q as u128) as u32);
            rem /= q as u128;
        }
        let image = map.mul_vec(field, &word);
        let img_w = image.iter().filter(|x| !x.is_zero()).count();
        if img_w == 0 {
            continue; // cycle/cocycle: excluded from the min
        }
        let dist = kernel_elems
            .iter()
            .map(|z| word.iter().zip(z).filter(|(a, b)| a != b).count())
            .min()
            .expect("kernel contains zero");
        let r = Ratio::new(img_w as u64, dist as u64);
        if best.map_or(true, |b| r < b) {
            best = Some(r);
        }
    }
    best.ok_or(ComplexError::ExpansionUndefined)
}

/// Closed-form Sipser-Spielman distance lower bounds
/// ((d - lambda2) d / (2 Delta) |V|, (d_dual - lambda2) / Delta |V|).
/// Nonpositive values are vacuous.
pub fn ss_distance_bound(
    lambda2: f64,
    delta: usize,
    num_vertices: usize,
    d_loc: usize,
    d_loc_dual: usize,
) -> (f64, f64) {
    let nv = num_vertices as f64;
    let d = d_loc as f64;
    let dd = d_loc_dual as f64;
    let bound_d1 = (d - lambda2) * d / (2.0 * delta as f64) * nv;
    let bound_d0 = (dd - lambda2) / delta as f64 * nv;
    (bound_d1, bound_d0)
}

/// An incidence chain complex over the integers: all coboundary entries in
/// {-1, 0, 1}, with delta delta = 0 over Z.
#[derive(Debug, Clone)]
pub struct IncidenceComplex {
    pub dims: Vec<usize>,
    pub labels: Vec<Vec<String>>,
    /// coboundaries[i][x] lists (x', sign) for x' in level i+1 covering x.
    pub coboundaries: Vec<Vec<Vec<(usize, i8)>>>,
}

impl IncidenceComplex {
    pub fn new(
        dims: Vec<usize>,
        labels: Vec<Vec<String>>,
        coboundaries: Vec<Vec<Vec<(usize, i8)>>>,
    ) -> Result<IncidenceComplex, ComplexError> {
        for cols in &coboundaries {
            for col in cols {
                if col.iter().any(|&(_, s)| s != 1 && s != -1) {
                    return Err(ComplexError::BadIncidence);
                }
            }
        }
        let x = IncidenceComplex { dims, labels, coboundaries };
        // delta delta = 0 over Z
        for i in 0..x.coboundaries.len().saturating_sub(1) {
            for src in 0..x.dims[i] {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for &(mid, s1) in &x.coboundaries[i][src] {
                    for &(top, s2) in &x.coboundaries[i + 1][mid] {
                        *acc.entry(top).or_insert(0) += s1 as i64 * s2 as i64;
                    }
                }
                if acc.values().any(|&v| v != 0) {
                    return Err(ComplexError::BoundaryComposition(i, i + 1));
                }
            }
        }
        Ok(x)
    }

    /// Covering pairs (x at level i) -> list of (x' at level i+1, sign).
    pub fn up(&self, level: usize, x: usize) -> &[(usize, i8)] {
        &self.coboundaries[level][x]
    }
}

/// The 1-dimensional incidence complex of a graph: X(0) = V, X(1) = E, with
/// sign +1 at v0(e) and -1 at v1(e).
pub fn incidence_from_graph(g: &MultiGraph) -> IncidenceComplex {
    let v_labels: Vec<String> = (0..g.num_vertices).map(|v| format!("v{v}")).collect();
    let e_labels: Vec<String> = (0..g.num_edges()).map(|e| format!("e{e}")).collect();
    let mut cols: Vec<Vec<(usize, i8)>> = vec![Vec::new(); g.num_vertices];
    for (eid, &(u, v)) in g.edges.iter().enumerate() {
        cols[u].push((eid, 1));
        cols[v].push((eid, -1));
    }
    IncidenceComplex::new(
        vec![g.num_vertices, g.num_edges()],
        vec![v_labels, e_labels],
        vec![cols],
    )
    .expect("graph incidence complexes are always valid")
}

/// The incidence complex of the r-dimensional boolean hypercube: elements are
/// type vectors in {0,1,*}^r (the level of an element is its number of *'s,
/// rendered as '2' internally), and the coboundary of a cell at a 0/1
/// coordinate carries sign (-1)^bit. This is the local model that r-fold
/// graph products project onto.
pub fn hypercube_complex(r: usize) -> IncidenceComplex {
    let pow3 = 3usize.pow(r as u32);
    let type_of = |idx: usize| -> Vec<u8> {
        let mut t = Vec::with_capacity(r);
        let mut rem = idx;
        for _ in 0..r {
            t.push((rem % 3) as u8);
            rem /= 3;
        }
        t
    };
    let mut per_level: Vec<Vec<Vec<u8>>> = vec![Vec::new(); r + 1];
    for idx in 0..pow3 {
        let t = type_of(idx);
        let level = t.iter().filter(|&&b| b == 2).count();
        per_level[level].push(t);
    }
    let index_of: Vec<HashMap<Vec<u8>, usize>> = per_level
        .iter()
        .map(|cells| cells.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect())
        .collect();
    let dims: Vec<usize> = per_level.iter().map(|c| c.len()).collect();
    let labels: Vec<Vec<String>> = per_level
        .iter()
        .map(|cells| {
            cells
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|&b| if b == 2 { '*' } else { (b'0' + b) as char })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut coboundaries: Vec<Vec<Vec<(usize, i8)>>> = Vec::with_capacity(r);
    for level in 0..r {
        let mut cols = Vec::with_capacity(per_level[level].len());
        for t in &per_level[level] {
            let mut col = Vec::new();
            for (c, &b) in t.iter().enumerate() {
                if b == 2 {
                    continue;
                }
                // the product sign rule: (-1)^{stars before c} times the
                // per-coordinate incidence (-1)^b
                let stars_before = t[..c].iter().filter(|&&x| x == 2).count();
                let mut up = t.clone();
                up[c] = 2;
                let sign = if (b as usize + stars_before) % 2 == 0 { 1 } else { -1 };
                col.push((index_of[level + 1][&up], sign));
            }
            cols.push(col);
        }
        coboundaries.push(cols);
    }
    IncidenceComplex::new(dims, labels, coboundaries).expect("hypercubes are valid complexes")
}

/// A system of local coefficients: a vector space dimension per poset element
/// and a map per covering pair.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    /// dims[level][x] = dim F_x.
    pub dims: Vec<Vec<usize>>,
    /// maps[(level, x, x')] = matrix of F_{x' <- x}, shape (dim F_{x'}, dim F_x),
    /// for x' at level+1 covering x.
    pub maps: HashMap<(usize, usize, usize), SparseMat>,
}

impl LocalSystem {
    /// Composition-law check: along every covering 2-path x -> x' -> x'', the
    /// composite map is independent of the midpoint.
    pub fn verify_composition(
        &self,
        field: &Field,
        inc: &IncidenceComplex,
    ) -> Result<(), ComplexError> {
        for level in 0..inc.coboundaries.len().saturating_sub(1) {
            for x in 0..inc.dims[level] {
                let mut per_top: HashMap<usize, SparseMat> = HashMap::new();
                for &(mid, _) in inc.up(level, x) {
                    let f1 = &self.maps[&(level, x, mid)];
                    for &(top, _) in inc.up(level + 1, mid) {
                        let f2 = &self.maps[&(level + 1, mid, top)];
                        let comp = f2.mul(field, f1);
                        if let Some(prev) = per_top.get(&top) {
                            if *prev != comp {
                                return Err(ComplexError::CompositionLawViolated(x, level));
                            }
                        } else {
                            per_top.insert(top, comp);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Assembles the cochain complex of a local system over an incidence complex:
/// (delta_i f)_{x'} = sum_x delta^X_{x',x} F_{x'<-x} f_x.
pub fn sheaf_complex(
    field: Arc<Field>,
    inc: &IncidenceComplex,
    loc: &LocalSystem,
) -> Result<ChainComplex, ComplexError> {
    loc.verify_composition(&field, inc)?;
    let r = inc.dims.len();
    // basis offsets per level
    let mut offsets: Vec<Vec<usize>> = Vec::with_capacity(r);
    let mut dims: Vec<usize> = Vec::with_capacity(r);
    let mut labels: Vec<Vec<String>> = Vec::with_capacity(r);
    for level in 0..r {
        let mut off = Vec::with_capacity(inc.dims[level]);
        let mut total = 0;
        let mut lab = Vec::new();
        for x in 0..inc.dims[level] {
            off.push(total);
            let d = loc.dims[level][x];
            for j in 0..d {
                lab.push(format!("{}#{}", inc.labels[level][x], j));
            }
            total += d;
        }
        offsets.push(off);
        dims.push(total);
        labels.push(lab);
    }
    let mut coboundaries = Vec::with_capacity(r - 1);
    for level in 0..r - 1 {
        let mut rows: Vec<Vec<(usize, Fe)>> = vec![Vec::new(); dims[level + 1]];
        for x in 0..inc.dims[level] {
            for &(xp, sign) in inc.up(level, x) {
                let map = &loc.maps[&(level, x, xp)];
                debug_assert_eq!(map.ncols, loc.dims[level][x]);
                debug_assert_eq!(map.nrows, loc.dims[level + 1][xp]);
                for (mr, mrow) in map.rows.iter().enumerate() {
                    for &(mc, v) in mrow {
                        let coeff = if sign == 1 { v } else { field.neg(v) };
                        rows[offsets[level + 1][xp] + mr].push((offsets[level][x] + mc, coeff));
                    }
                }
            }
        }
        // merge duplicate (row, col) pairs
        let merged: Vec<Vec<(usize, Fe)>> = rows
            .into_iter()
            .map(|mut rvec| {
                rvec.sort_by_key(|&(c, _)| c);
                let mut out: Vec<(usize, Fe)> = Vec::with_capacity(rvec.len());
                for (c, v) in rvec {
                    if let Some(last) = out.last_mut() {
                        if last.0 == c {
                            last.1 = field.add(last.1, v);
                            continue;
                        }
                    }
                    out.push((c, v));
                }
                out.retain(|&(_, v)| !v.is_zero());
                out
            })
            .collect();
        coboundaries.push(SparseMat { nrows: dims[level + 1], ncols: dims[level], rows: merged });
    }
    ChainComplex::new(field, dims, labels, coboundaries)
}

/// Builds the Sipser-Spielman 1-dimensional complex: F_v = GF(q)^m,
/// F_e = GF(q), and F_{e <- v} the e-row of h_v^T.
///
/// `h` holds one m x Delta full-rank matrix per vertex, with columns indexed
/// by `edge_order[v]` (the incident edge ids of v, in a fixed order).
pub fn sipser_spielman(
    field: Arc<Field>,
    g: &MultiGraph,
    h: &[SparseMat],
    edge_order: &[Vec<usize>],
) -> Result<ChainComplex, ComplexError> {
    let delta = g.regular_degree().map_err(|_| ComplexError::NotRegular)?;
    assert_eq!(h.len(), g.num_vertices);
    let m = h[0].nrows;
    for (v, hv) in h.iter().enumerate() {
        if hv.nrows != m || hv.ncols != delta {
            return Err(ComplexError::ShapeMismatch(v));
        }
        if hv.rank(&field) != m {
            return Err(ComplexError::RankDeficient(v));
        }
    }
    let inc = incidence_from_graph(g);
    let mut maps = HashMap::new();
    for v in 0..g.num_vertices {
        let ht = h[v].transpose(); // Delta x m
        for (col, &e) in edge_order[v].iter().enumerate() {
            // F_{e <- v} = row `col` of h_v^T as a 1 x m matrix
            let row = ht.rows[col].clone();
            maps.insert((0usize, v, e), SparseMat { nrows: 1, ncols: m, rows: vec![row] });
        }
    }
    let loc = LocalSystem {
        dims: vec![vec![m; g.num_vertices], vec![1; g.num_edges()]],
        maps,
    };
    sheaf_complex(field, &inc, &loc)
}

/// A free action of GF(p)^dims on the basis of a chain complex, stored as one
/// basis permutation per group generator and per level.
#[derive(Debug, Clone)]
pub struct GroupAction {
    pub group: GroupShape,
    /// perms[gen][level][basis index] = image basis index.
    pub perms: Vec<Vec<Vec<usize>>>,
}

impl GroupAction {
    /// Permutation of level `level` under an arbitrary group element.
    pub fn perm(&self, level: usize, g: u64, level_dim: usize) -> Vec<usize> {
        let coords = self.group.coords(g);
        let mut out: Vec<usize> = (0..level_dim).collect();
        for (gen, &c) in coords.iter().enumerate() {
            for _ in 0..c {
                let p = &self.perms[gen][level];
                out = out.into_iter().map(|i| p[i]).collect();
            }
        }
        out
    }

    /// Verifies the action is free (no nonzero element fixes a basis element)
    /// and commutes with the boundary maps of `c`.
    pub fn verify(&self, c: &ChainComplex) -> Result<(), ComplexError> {
        for gen in 0..self.perms.len() {
            if self.perms[gen].len() != c.dims.len() {
                return Err(ComplexError::ShapeMismatch(0));
            }
            for level in 0..c.dims.len() {
                if self.perms[gen][level].len() != c.dims[level] {
                    return Err(ComplexError::ShapeMismatch(level));
                }
            }
        }
        for g in 1..self.group.size() {
            for level in 0..c.dims.len() {
                let p = self.perm(level, g, c.dims[level]);
                if let Some(fixed) = p.iter().enumerate().position(|(i, &pi)| i == pi) {
                    return Err(ComplexError::ActionNotFree(g, fixed));
                }
            }
        }
        // commutation with delta on generators suffices
        for gen in 0..self.perms.len() {
            let mut coords = vec![0u32; self.group.dims];
            coords[gen] = 1;
            let g = self.group.index(&coords);
            for (i, d) in c.coboundaries.iter().enumerate() {
                let p_lo = self.perm(i, g, c.dims[i]);
                let p_hi = self.perm(i + 1, g, c.dims[i + 1]);
                // check d[p_hi(r)][p_lo(col)] == d[r][col]
                for (r, row) in d.rows.iter().enumerate() {
                    for &(col, v) in row {
                        if d.get(p_hi[r], p_lo[col]) != v {
                            return Err(ComplexError::ActionBoundaryMismatch);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Tensor or balanced product of cochain complexes. With no action (or the
/// trivial group) this is the plain tensor product; with free actions the
/// product is over orbits (a, b) ~ (g a, -g b), represented by the
/// lexicographically least pair.
pub fn balanced_product(
    a: &ChainComplex,
    b: &ChainComplex,
    action: Option<(&GroupAction, &GroupAction)>,
) -> Result<ChainComplex, ComplexError> {
    let field = a.field.clone();
    if let Some((aa, ab)) = action {
        if aa.group != ab.group {
            return Err(ComplexError::GroupMismatch);
        }
        aa.verify(a)?;
        ab.verify(b)?;
    }
    let ra = a.dims.len() - 1;
    let rb = b.dims.len() - 1;
    let r = ra + rb;

    struct Block {
        orbit_of: HashMap<(usize, usize), usize>,
        reps: Vec<(usize, usize)>,
        offset: usize,
    }
    let mut blocks: Vec<Vec<Option<Block>>> =
        (0..=ra).map(|_| (0..=rb).map(|_| None).collect()).collect();
    let mut dims = vec![0usize; r + 1];
    let mut labels: Vec<Vec<String>> = vec![Vec::new(); r + 1];
    for ja in 0..=ra {
        for jb in 0..=rb {
            let i = ja + jb;
            let mut orbit_of: HashMap<(usize, usize), usize> = HashMap::new();
            let mut reps = Vec::new();
            for xa in 0..a.dims[ja] {
                for xb in 0..b.dims[jb] {
                    if orbit_of.contains_key(&(xa, xb)) {
                        continue;
                    }
                    let id = reps.len();
                    reps.push((xa, xb));
                    match action {
                        None => {
                            orbit_of.insert((xa, xb), id);
                        }
                        Some((aa, ab)) => {
                            for g in 0..aa.group.size() {
                                let pa = aa.perm(ja, g, a.dims[ja]);
                                let pb = ab.perm(jb, ab.group.neg(g), b.dims[jb]);
                                orbit_of.insert((pa[xa], pb[xb]), id);
                            }
                        }
                    }
                }
            }
            let offset = dims[i];
            dims[i] += reps.len();
            for &(xa, xb) in &reps {
                labels[i].push(format!(
                    "({}.{})x({}.{})",
                    ja, a.labels[ja][xa], jb, b.labels[jb][xb]
                ));
            }
            blocks[ja][jb] = Some(Block { orbit_of, reps, offset });
        }
    }

    // delta_i = sum over blocks (ja, jb), ja + jb = i, of
    // delta^A_{ja} (x) I + (-1)^{ja} I (x) delta^B_{jb}
    let mut coboundaries = Vec::with_capacity(r);
    for i in 0..r {
        let mut rows: Vec<Vec<(usize, Fe)>> = vec![Vec::new(); dims[i + 1]];
        for ja in 0..=ra.min(i) {
            let jb = i - ja;
            if jb > rb {
                continue;
            }
            let src_block = blocks[ja][jb].as_ref().unwrap();
            let da_t = if ja + 1 <= ra {
                Some(a.coboundaries[ja].transpose())
            } else {
                None
            };
            let db_t = if jb + 1 <= rb {
                Some(b.coboundaries[jb].transpose())
            } else {
                None
            };
            for (src_idx, &(xa, xb)) in src_block.reps.iter().enumerate() {
                let src_col = src_block.offset + src_idx;
                if let Some(da_t) = &da_t {
                    let tgt = blocks[ja + 1][jb].as_ref().unwrap();
                    for &(xa2, v) in &da_t.rows[xa] {
                        let orbit = tgt.orbit_of[&(xa2, xb)];
                        rows[tgt.offset + orbit].push((src_col, v));
                    }
                }
                if let Some(db_t) = &db_t {
                    let tgt = blocks[ja][jb + 1].as_ref().unwrap();
                    for &(xb2, v) in &db_t.rows[xb] {
                        let orbit = tgt.orbit_of[&(xa, xb2)];
                        let coeff = if ja % 2 == 0 { v } else { field.neg(v) };
                        rows[tgt.offset + orbit].push((src_col, coeff));
                    }
                }
            }
        }
        let merged: Vec<Vec<(usize, Fe)>> = rows
            .into_iter()
            .map(|mut rvec| {
                rvec.sort_by_key(|&(c, _)| c);
                let mut out: Vec<(usize, Fe)> = Vec::new();
                for (c, v) in rvec {
                    if let Some(last) = out.last_mut() {
                        if last.0 == c {
                            last.1 = field.add(last.1, v);
                            continue;
                        }
                    }
                    out.push((c, v));
                }
                out.retain(|&(_, v)| !v.is_zero());
                out
            })
            .collect();
        coboundaries.push(SparseMat { nrows: dims[i + 1], ncols: dims[i], rows: merged });
    }
    ChainComplex::new(field, dims, labels, coboundaries)
}

/// Plain tensor product.
pub fn tensor_product(a: &ChainComplex, b: &ChainComplex) -> Result<ChainComplex, ComplexError> {
    balanced_product(a, b, None)
}

/// Kunneth check: dim H^i(A tensor B) = sum_j dim H^j(A) dim H^{i-j}(B).
pub fn kunneth_check(a: &ChainComplex, b: &ChainComplex, i: usize) -> Result<bool, ComplexError> {
    let c = tensor_product(a, b)?;
    let lhs = if i < c.dims.len() { c.cohomology_dim(i) } else { 0 };
    let mut rhs = 0usize;
    for j in 0..=i {
        if j < a.dims.len() && (i - j) < b.dims.len() {
            rhs += a.cohomology_dim(j) * b.cohomology_dim(i - j);
        }
    }
    Ok(lhs == rhs)
}

/// Product distance check: d^i(A tensor B) >= min_j max(d^j(A), d^{i-j}(B)),
/// with None treated as infinite.
pub fn product_distance_check(
    a: &ChainComplex,
    b: &ChainComplex,
    i: usize,
    budget: &Budget,
) -> Result<bool, ComplexError> {
    let c = tensor_product(a, b)?;
    let d_prod = if i < c.dims.len() {
        c.cosystolic_distance(i, budget)?
    } else {
        None
    };
    let mut bound: Distance = None; // min over j, starts at infinity
    for j in 0..=i {
        if j >= a.dims.len() || (i - j) >= b.dims.len() {
            continue;
        }
        let da = a.cosystolic_distance(j, budget)?;
        let db = b.cosystolic_distance(i - j, budget)?;
        let pair_max = match (da, db) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        bound = match (bound, pair_max) {
            (None, x) => x,
            (x, None) => x,
            (Some(x), Some(y)) => Some(x.min(y)),
        };
    }
    Ok(match (d_prod, bound) {
        (None, _) => true,        // product distance infinite
        (Some(_), None) => false, // finite distance but infinite bound
        (Some(dp), Some(bd)) => dp >= bd,
    })
}
