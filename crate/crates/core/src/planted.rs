//! The three Reed-Muller-planted one-dimensional complexes on a lifted
//! expander, with executable planting checks.
//!
//! All three kinds impose local Reed-Solomon structure at each vertex of the
//! lifted graph, copying the same local matrix h_v to every vertex above a
//! base vertex v:
//!
//! - kind 1: ker(h_v) is the local RS code of degree < ell,
//! - kind 2: im(h_v^T) is the local RS code of degree < ell,
//! - kind 3: im(h_v^T) is the shortened code of degree < |E| - ell vanishing
//!   off E(v), realized as a twisted RS code.

use crate::budget::Budget;
use crate::codes::{rs_code, rs_dual, CodeError, LinearCode};
use crate::complexes::{sipser_spielman, ChainComplex, ComplexError, GroupAction};
use crate::field::{Fe, Field};
use crate::linalg::SparseMat;
use crate::poly::{interpolate_grid, monomials_below_total_degree, Polynomial, Tensor};
use crate::spectral::LiftedGraph;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantedError {
    #[error("ell {0} outside [0, {1}]")]
    BadEll(usize, usize),
    #[error("kind-3 shortening infeasible: |E| - ell = {0} < |E| - Delta = {1}")]
    InfeasibleShortening(usize, usize),
    #[error("degree {0} too high for this complex (needs < {1})")]
    DegreeTooHigh(usize, usize),
    #[error("no preimage under h_v^T at lifted vertex {0} (broken local matrices)")]
    NoPreimage(usize),
    #[error("planting violated: {0}")]
    PlantingViolated(String),
    #[error("local matrix invariant failed at base vertex {0}: {1}")]
    LocalInvariant(usize, String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Budget(#[from] crate::budget::BudgetExceeded),
}

/// Which local structure is imposed at each vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantKind {
    Kernel,          // kind 1
    Image,           // kind 2
    ImageComplement, // kind 3
}

impl PlantKind {
    pub fn number(self) -> u8 {
        match self {
            PlantKind::Kernel => 1,
            PlantKind::Image => 2,
            PlantKind::ImageComplement => 3,
        }
    }
}

/// An RM-planted one-dimensional complex on a lifted graph.
#[derive(Debug, Clone)]
pub struct RmPlantedComplex {
    pub kind: PlantKind,
    pub ell: usize,
    pub field: Arc<Field>,
    pub lift: Arc<LiftedGraph>,
    pub complex: ChainComplex,
    /// Local rows per base vertex (m x Delta), columns in `base_edge_order`.
    pub base_h: Vec<SparseMat>,
    /// Incident base edge ids per base vertex, fixing the column order.
    pub base_edge_order: Vec<Vec<usize>>,
    pub m: usize,
    pub delta: usize,
}

impl RmPlantedComplex {
    /// Level-0 basis index of (lifted vertex, local row).
    pub fn vertex_basis(&self, lifted_v: usize, row: usize) -> usize {
        lifted_v * self.m + row
    }

    /// Incident lifted edge ids of a lifted vertex, in base-edge column order.
    pub fn lifted_edge_order(&self, lifted_v: usize) -> Vec<usize> {
        let (v, x) = self.lift.vertex_parts(lifted_v);
        let field = &self.field;
        let values = self.lift.base.edge_values.as_ref().expect("edge values present");
        let vg = crate::spectral::VectorGroup::new(field, self.lift.t);
        let xv = vg.vector_of(field, x);
        self.base_edge_order[v]
            .iter()
            .map(|&e| {
                // the unique lifted edge over e at this vertex: y = x + e L_V(v)
                let y = field.add_vec(&xv, &field.scale_vec(values[e], &self.lift.labeling.labels[v]));
                self.lift.edge_index(e, vg.index_of(field, &y))
            })
            .collect()
    }

    /// The point of GF(q)^{t+1} carried by a lifted edge.
    pub fn edge_point(&self, lifted_e: usize) -> Vec<Fe> {
        let (e, y) = self.lift.edge_parts(lifted_e);
        let field = &self.field;
        let values = self.lift.base.edge_values.as_ref().expect("edge values present");
        let vg = crate::spectral::VectorGroup::new(field, self.lift.t);
        let mut pt = vec![values[e]];
        pt.extend(vg.vector_of(field, y));
        pt
    }

    /// The additive GF(q)^t action on the complex basis, one permutation per
    /// group generator: (v, x) -> (v, x + g) on vertices and edges.
    pub fn group_action(&self) -> GroupAction {
        let group = self.lift.group.clone();
        let mut perms = Vec::with_capacity(group.dims);
        for gen in 0..group.dims {
            let mut coords = vec![0u32; group.dims];
            coords[gen] = 1;
            let g = group.index(&coords);
            let level0: Vec<usize> = (0..self.complex.dims[0])
                .map(|idx| {
                    let (lv, row) = (idx / self.m, idx % self.m);
                    self.vertex_basis(self.lift.act_on_vertex(g, lv), row)
                })
                .collect();
            let level1: Vec<usize> = (0..self.complex.dims[1])
                .map(|idx| self.lift.act_on_edge(g, idx))
                .collect();
            perms.push(vec![level0, level1]);
        }
        GroupAction { group, perms }
    }

    /// Minimum distances of the local code ker(h_v) and its dual im(h_v^T),
    /// over all base vertices.
    pub fn local_distances(&self, budget: &Budget) -> Result<(usize, usize), PlantedError> {
        let field = &self.field;
        let mut d_min = usize::MAX;
        let mut dual_min = usize::MAX;
        for hv in &self.base_h {
            let ker = LinearCode::from_parity_check(field, hv.clone());
            if let Some(d) = ker.min_weight(field, budget)? {
                d_min = d_min.min(d);
            }
            let im = LinearCode::from_generator(field, hv.clone());
            if let Some(d) = im.min_weight(field, budget)? {
                dual_min = dual_min.min(d);
            }
        }
        Ok((d_min, dual_min))
    }
}

/// Builds the RM-planted complex of the given kind, verifying the local
/// kernel/image invariants at construction.
pub fn rm_planted_complex(
    field: Arc<Field>,
    lift: Arc<LiftedGraph>,
    ell: usize,
    kind: PlantKind,
) -> Result<RmPlantedComplex, PlantedError> {
    let base = &lift.base;
    let delta = base.regular_degree().map_err(ComplexError::from)?;
    if ell > delta {
        return Err(PlantedError::BadEll(ell, delta));
    }
    let values = base
        .edge_values
        .as_ref()
        .ok_or(ComplexError::from(crate::graph::GraphError::MissingEdgeValues))?;
    let n_edges = base.num_edges();
    if kind == PlantKind::ImageComplement && n_edges - ell < n_edges - delta {
        return Err(PlantedError::InfeasibleShortening(n_edges - ell, n_edges - delta));
    }
    let m = match kind {
        PlantKind::Kernel | PlantKind::ImageComplement => delta - ell,
        PlantKind::Image => ell,
    };

    let base_edge_order: Vec<Vec<usize>> =
        (0..base.num_vertices).map(|v| base.edges_at(v)).collect();
    let mut base_h = Vec::with_capacity(base.num_vertices);
    for v in 0..base.num_vertices {
        let points: Vec<Fe> = base_edge_order[v].iter().map(|&e| values[e]).collect();
        let hv = match kind {
            PlantKind::Kernel => {
                // rows span the dual of RS(deg < ell): ev_{E(v), beta}(deg < Delta - ell)
                let (beta, dual_deg) = rs_dual(&field, &points, &vec![Fe::ONE; delta], ell)?;
                debug_assert_eq!(dual_deg, delta - ell);
                if m == 0 {
                    SparseMat::zero(0, delta)
                } else {
                    rs_code(&field, &points, &beta, m, &[])?.code.matrix
                }
            }
            PlantKind::Image => {
                // h_v^T columns = monomial evaluations of degree < ell
                if m == 0 {
                    SparseMat::zero(0, delta)
                } else {
                    rs_code(&field, &points, &vec![Fe::ONE; delta], m, &[])?.code.matrix
                }
            }
            PlantKind::ImageComplement => {
                // shortened RS realized as a twisted RS code: the twist is the
                // vanishing product W(e) = prod_{z in E \ E(v)} (e - z)
                let at_v: std::collections::HashSet<Fe> = points.iter().copied().collect();
                let outside: Vec<Fe> = values
                    .iter()
                    .copied()
                    .filter(|z| !at_v.contains(z))
                    .collect();
                let twist: Vec<Fe> = points
                    .iter()
                    .map(|&e| {
                        let mut w = Fe::ONE;
                        for &z in &outside {
                            w = field.mul(w, field.sub(e, z));
                        }
                        w
                    })
                    .collect();
                if twist.iter().any(|w| w.is_zero()) {
                    return Err(PlantedError::LocalInvariant(v, "zero twist".into()));
                }
                if m == 0 {
                    SparseMat::zero(0, delta)
                } else {
                    rs_code(&field, &points, &twist, m, &[])?.code.matrix
                }
            }
        };
        verify_local_invariant(&field, kind, &hv, &points, values, ell, delta, v)?;
        base_h.push(hv);
    }

    // copy local matrices along the action and assemble the lifted complex
    let gs = lift.group_size() as usize;
    let mut h_lifted = Vec::with_capacity(base.num_vertices * gs);
    let mut edge_order_lifted = Vec::with_capacity(base.num_vertices * gs);
    let stub = RmPlantedComplex {
        kind,
        ell,
        field: field.clone(),
        lift: lift.clone(),
        complex: ChainComplex {
            field: field.clone(),
            dims: vec![0],
            labels: vec![vec![]],
            coboundaries: vec![],
        },
        base_h: base_h.clone(),
        base_edge_order: base_edge_order.clone(),
        m,
        delta,
    };
    for lv in 0..base.num_vertices * gs {
        let (v, _) = lift.vertex_parts(lv);
        h_lifted.push(base_h[v].clone());
        edge_order_lifted.push(stub.lifted_edge_order(lv));
    }
    let complex = sipser_spielman(field.clone(), &lift.lifted, &h_lifted, &edge_order_lifted)?;
    let planted = RmPlantedComplex { complex, ..stub };
    planted.group_action().verify(&planted.complex)?;
    Ok(planted)
}

#[allow(clippy::too_many_arguments)]
fn verify_local_invariant(
    field: &Field,
    kind: PlantKind,
    hv: &SparseMat,
    points: &[Fe],
    all_values: &[Fe],
    ell: usize,
    delta: usize,
    v: usize,
) -> Result<(), PlantedError> {
    let expected_rank = hv.nrows;
    if hv.rank(field) != expected_rank {
        return Err(PlantedError::LocalInvariant(v, "rank deficient".into()));
    }
    match kind {
        PlantKind::Kernel => {
            // ker h_v = ev(deg < ell): containment + dimension count
            for j in 0..ell {
                let w: Vec<Fe> = points.iter().map(|&e| field.pow(e, j as u64)).collect();
                if !hv.mul_vec(field, &w).iter().all(|x| x.is_zero()) {
                    return Err(PlantedError::LocalInvariant(v, format!("X^{j} not in kernel")));
                }
            }
            if delta - expected_rank != ell {
                return Err(PlantedError::LocalInvariant(v, "kernel dimension".into()));
            }
        }
        PlantKind::Image => {
            // im(h_v^T) = ev(deg < ell): rows are monomial evaluations
            for (j, row) in hv.to_dense().iter().enumerate() {
                for (col, &e) in points.iter().enumerate() {
                    if row[col] != field.pow(e, j as u64) {
                        return Err(PlantedError::LocalInvariant(v, "image basis".into()));
                    }
                }
            }
        }
        PlantKind::ImageComplement => {
            // each row, extended by zeros off E(v), interpolates to a
            // polynomial of degree < |E| - ell
            let n = all_values.len();
            let axis: Vec<Fe> = all_values.to_vec();
            for row in hv.to_dense() {
                let mut tensor = Tensor::new(vec![n]);
                for (col, &val) in row.iter().enumerate() {
                    let pos = all_values.iter().position(|&z| z == points[col]).unwrap();
                    tensor.data[pos] = val;
                }
                let poly = interpolate_grid(field, &[axis.clone()], &tensor)
                    .map_err(|e| PlantedError::LocalInvariant(v, e.to_string()))?;
                if poly.total_degree() >= (n - ell) as i64 {
                    return Err(PlantedError::LocalInvariant(
                        v,
                        format!("shortened row has degree {}", poly.total_degree()),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// iota^0 for kind-2 complexes: per lifted vertex, the unique h_v^T-preimage
/// of the restriction of f to the vertex line. f has t+1 variables.
pub fn iota0(cx: &RmPlantedComplex, f: &Polynomial) -> Result<Vec<Fe>, PlantedError> {
    assert_eq!(cx.kind, PlantKind::Image, "iota0 lives on kind-2 complexes");
    if f.total_degree() >= cx.ell as i64 && !f.is_zero() {
        return Err(PlantedError::DegreeTooHigh(f.total_degree() as usize, cx.ell));
    }
    let field = &cx.field;
    let mut out = vec![Fe::ZERO; cx.complex.dims[0]];
    let gs = cx.lift.group_size() as usize;
    for lv in 0..cx.lift.base.num_vertices * gs {
        let edges = cx.lifted_edge_order(lv);
        let vals: Vec<Fe> = edges
            .iter()
            .map(|&le| f.eval(field, &cx.edge_point(le)).expect("dims"))
            .collect();
        let (v, _) = cx.lift.vertex_parts(lv);
        let ht = cx.base_h[v].transpose(); // Delta x m
        let y = ht.solve(field, &vals).ok_or(PlantedError::NoPreimage(lv))?;
        for (row, &c) in y.iter().enumerate() {
            out[cx.vertex_basis(lv, row)] = c;
        }
    }
    Ok(out)
}

/// iota^1: plain evaluation of f on every lifted edge point.
pub fn iota1(cx: &RmPlantedComplex, f: &Polynomial) -> Vec<Fe> {
    let field = &cx.field;
    (0..cx.complex.dims[1])
        .map(|le| f.eval(field, &cx.edge_point(le)).expect("dims"))
        .collect()
}

/// Report of a planting check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantingReport {
    pub kind: u8,
    pub checked: usize,
}

/// Executable planting checks, one per kind:
///
/// - kind 1: every monomial of total degree < ell evaluates into Z_1;
/// - kind 2: delta_0 iota0 = 0 on a monomial basis, and iota0 is injective on
///   the span of monomials avoiding the first variable;
/// - kind 3: every coboundary generator interpolates on the grid
///   E x GF(q)^t to total degree < t(q-1) + |E| - ell.
pub fn planting_check(cx: &RmPlantedComplex, budget: &Budget) -> Result<PlantingReport, PlantedError> {
    let field = &cx.field;
    let t = cx.lift.t;
    let q = field.size();
    let n_edges = cx.lift.base.num_edges();
    match cx.kind {
        PlantKind::Kernel => {
            let monos = monomials_below_total_degree(t + 1, cx.ell);
            budget.check("planting kind 1", monos.len() as u128 * cx.complex.dims[1] as u128)?;
            // Z_1 = ker(partial_1) with partial_1 = delta_0 transposed
            let partial1 = cx.complex.coboundaries[0].transpose();
            for exps in &monos {
                let f = Polynomial::monomial(t + 1, exps, Fe::ONE);
                let word = iota1(cx, &f);
                let out = partial1.mul_vec(field, &word);
                if !out.iter().all(|x| x.is_zero()) {
                    return Err(PlantedError::PlantingViolated(format!(
                        "kind 1: monomial {exps:?} is not a cycle"
                    )));
                }
            }
            Ok(PlantingReport { kind: 1, checked: monos.len() })
        }
        PlantKind::Image => {
            let monos = monomials_below_total_degree(t + 1, cx.ell);
            budget.check("planting kind 2", monos.len() as u128 * cx.complex.dims[0] as u128)?;
            for exps in &monos {
                let f = Polynomial::monomial(t + 1, exps, Fe::ONE);
                let c0 = iota0(cx, &f)?;
                let img = cx.complex.coboundaries[0].mul_vec(field, &c0);
                if !img.iter().all(|x| x.is_zero()) {
                    return Err(PlantedError::PlantingViolated(format!(
                        "kind 2: delta_0 iota0({exps:?}) != 0"
                    )));
                }
            }
            // injectivity on polynomials avoiding X_0: stack the images of the
            // monomial basis and check full rank
            let no_x0: Vec<Vec<u16>> = monos.iter().filter(|e| e[0] == 0).cloned().collect();
            let images: Vec<Vec<Fe>> = no_x0
                .iter()
                .map(|exps| iota0(cx, &Polynomial::monomial(t + 1, exps, Fe::ONE)))
                .collect::<Result<_, _>>()?;
            let rank = SparseMat::from_dense(field, &images).rank(field);
            if rank != no_x0.len() {
                return Err(PlantedError::PlantingViolated(format!(
                    "kind 2: iota0 not injective on X_0-free monomials ({rank} < {})",
                    no_x0.len()
                )));
            }
            Ok(PlantingReport { kind: 2, checked: monos.len() })
        }
        PlantKind::ImageComplement => {
            let bound = (t as u64 * (q - 1) + n_edges as u64).saturating_sub(cx.ell as u64);
            let gens = cx.complex.dims[0];
            budget.check(
                "planting kind 3",
                gens as u128 * cx.complex.dims[1] as u128,
            )?;
            // grid axes: edge values of E, then all of GF(q) per lift axis
            let values = cx.lift.base.edge_values.as_ref().unwrap().clone();
            let mut axes = vec![values];
            for _ in 0..t {
                axes.push(field.iter().collect());
            }
            for g in 0..gens {
                let mut basis = vec![Fe::ZERO; gens];
                basis[g] = Fe::ONE;
                let cob = cx.complex.coboundaries[0].mul_vec(field, &basis);
                // place the E x GF(q)^t vector onto the grid tensor
                let mut tensor = Tensor::new(axes.iter().map(|a| a.len()).collect());
                for (le, &val) in cob.iter().enumerate() {
                    if val.is_zero() {
                        continue;
                    }
                    let pt = cx.edge_point(le);
                    let multi: Vec<usize> = pt
                        .iter()
                        .enumerate()
                        .map(|(ax, p)| axes[ax].iter().position(|x| x == p).unwrap())
                        .collect();
                    tensor.set(&multi, val);
                }
                let poly = interpolate_grid(field, &axes, &tensor)
                    .map_err(|e| PlantedError::PlantingViolated(e.to_string()))?;
                if poly.total_degree() >= bound as i64 {
                    return Err(PlantedError::PlantingViolated(format!(
                        "kind 3: coboundary generator {g} has degree {} >= {bound}",
                        poly.total_degree()
                    )));
                }
            }
            Ok(PlantingReport { kind: 3, checked: gens })
        }
    }
}
