//! JSON artifact schemas shared by the library and the CLI.
//!
//! Every file carries a `schema` version field. Field elements are stored as
//! their GF(p) coordinate vectors (constant term first) so that files stay
//! meaningful independently of internal index packing.

use crate::complexes::{ChainComplex, ComplexError};
use crate::field::{Fe, Field, FieldError, FieldSpec};
use crate::graph::{GraphError, MultiGraph};
use crate::linalg::SparseMat;
use crate::poly::Polynomial;
use crate::spectral::{build_lifted_graph, LiftedGraph, SpectralError, VertexLabeling};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("unsupported schema version {0}")]
    BadSchema(u32),
    #[error("malformed artifact: {0}")]
    Malformed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    File(#[from] std::io::Error),
}

fn fe_coords(field: &Field, x: Fe) -> Vec<u64> {
    field.coords(x).into_iter().map(u64::from).collect()
}

fn fe_from_coords(field: &Field, coords: &[u64]) -> Result<Fe, IoError> {
    if coords.len() != field.m() || coords.iter().any(|&c| c >= field.p()) {
        return Err(IoError::Malformed("field element coordinates out of range".into()));
    }
    let c: Vec<u32> = coords.iter().map(|&c| c as u32).collect();
    Ok(field.from_coords(&c))
}

/// `{"schema":1,"bipartite":true,"v0":n,"v1":n,"edges":[[id,u,v,[coords]]]}`
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub schema: u32,
    pub bipartite: bool,
    pub v0: usize,
    pub v1: usize,
    pub edges: Vec<(usize, usize, usize, Vec<u64>)>,
}

pub fn graph_to_json(field: &Field, g: &MultiGraph) -> GraphJson {
    let (v0, v1) = g.bipartition.unwrap_or((g.num_vertices, 0));
    GraphJson {
        schema: SCHEMA_VERSION,
        bipartite: g.bipartition.is_some(),
        v0,
        v1,
        edges: g
            .edges
            .iter()
            .enumerate()
            .map(|(id, &(u, v))| {
                let coords = g
                    .edge_values
                    .as_ref()
                    .map(|vals| fe_coords(field, vals[id]))
                    .unwrap_or_default();
                (id, u, v, coords)
            })
            .collect(),
    }
}

pub fn graph_from_json(field: &Field, j: &GraphJson) -> Result<MultiGraph, IoError> {
    if j.schema != SCHEMA_VERSION {
        return Err(IoError::BadSchema(j.schema));
    }
    let mut edges = Vec::with_capacity(j.edges.len());
    let mut values = Vec::with_capacity(j.edges.len());
    let mut has_values = false;
    for (id, (eid, u, v, coords)) in j.edges.iter().enumerate() {
        if *eid != id {
            return Err(IoError::Malformed("edge ids must be consecutive".into()));
        }
        edges.push((*u, *v));
        if !coords.is_empty() {
            has_values = true;
            values.push(fe_from_coords(field, coords)?);
        }
    }
    if has_values && values.len() != edges.len() {
        return Err(IoError::Malformed("edge values must cover all edges".into()));
    }
    let bipartition = j.bipartite.then_some((j.v0, j.v1));
    Ok(MultiGraph::new(
        j.v0 + j.v1,
        bipartition,
        edges,
        has_values.then_some(values),
    )?)
}

/// `{"t":t,"labels":{"0":[coords...],...}}`, label coordinates flattened
/// element-major (t elements, m GF(p) digits each).
#[derive(Debug, Serialize, Deserialize)]
pub struct LabelingJson {
    pub t: usize,
    pub labels: BTreeMap<String, Vec<u64>>,
}

pub fn labeling_to_json(field: &Field, l: &VertexLabeling) -> LabelingJson {
    LabelingJson {
        t: l.t,
        labels: l
            .labels
            .iter()
            .enumerate()
            .map(|(v, lab)| {
                let flat: Vec<u64> = lab.iter().flat_map(|&x| fe_coords(field, x)).collect();
                (v.to_string(), flat)
            })
            .collect(),
    }
}

pub fn labeling_from_json(
    field: &Field,
    j: &LabelingJson,
    num_vertices: usize,
) -> Result<VertexLabeling, IoError> {
    let m = field.m();
    let mut labels = vec![Vec::new(); num_vertices];
    for (key, flat) in &j.labels {
        let v: usize = key
            .parse()
            .map_err(|_| IoError::Malformed(format!("bad vertex key {key}")))?;
        if v >= num_vertices || flat.len() != j.t * m {
            return Err(IoError::Malformed("labeling shape mismatch".into()));
        }
        labels[v] = flat
            .chunks(m)
            .map(|c| fe_from_coords(field, c))
            .collect::<Result<_, _>>()?;
    }
    if labels.iter().any(|l| l.len() != j.t) {
        return Err(IoError::Malformed("labels must cover all vertices".into()));
    }
    Ok(VertexLabeling::new(j.t, labels))
}

/// The output of `build-expander`: everything needed to reconstruct the
/// lifted graph deterministically.
#[derive(Debug, Serialize, Deserialize)]
pub struct LiftArtifact {
    pub schema: u32,
    pub field: FieldSpec,
    pub t: usize,
    pub base: GraphJson,
    pub labels: LabelingJson,
    pub lambda2: f64,
    pub eta: f64,
    pub meets_target: bool,
    pub seed: u64,
    pub label_source: String,
}

pub fn lift_from_artifact(a: &LiftArtifact) -> Result<(Arc<Field>, Arc<LiftedGraph>), IoError> {
    if a.schema != SCHEMA_VERSION {
        return Err(IoError::BadSchema(a.schema));
    }
    let field = Arc::new(Field::from_spec(&a.field)?);
    let base = graph_from_json(&field, &a.base)?;
    let labeling = labeling_from_json(&field, &a.labels, base.num_vertices)?;
    let lift = Arc::new(build_lifted_graph(&field, &base, &labeling)?);
    Ok((field, lift))
}

/// `{"rows":n,"cols":m,"entries":[[i,j,[coef coords]]]}`
#[derive(Debug, Serialize, Deserialize)]
pub struct SparseMatJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, Vec<u64>)>,
}

pub fn sparse_to_json(field: &Field, m: &SparseMat) -> SparseMatJson {
    let mut entries = Vec::with_capacity(m.nnz());
    for (r, row) in m.rows.iter().enumerate() {
        for &(c, v) in row {
            entries.push((r, c, fe_coords(field, v)));
        }
    }
    SparseMatJson { rows: m.nrows, cols: m.ncols, entries }
}

pub fn sparse_from_json(field: &Field, j: &SparseMatJson) -> Result<SparseMat, IoError> {
    let mut m = SparseMat::zero(j.rows, j.cols);
    for (r, c, coords) in &j.entries {
        if *r >= j.rows || *c >= j.cols {
            return Err(IoError::Malformed("entry index out of range".into()));
        }
        m.set(*r, *c, fe_from_coords(field, coords)?);
    }
    Ok(m)
}

/// `{"schema":1,"field":{...},"levels":[dims],"boundaries":[...],"labels":[[...]]}`
#[derive(Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub schema: u32,
    pub field: FieldSpec,
    pub levels: Vec<usize>,
    pub boundaries: Vec<SparseMatJson>,
    pub labels: Vec<Vec<String>>,
}

pub fn complex_to_json(c: &ChainComplex) -> ComplexJson {
    ComplexJson {
        schema: SCHEMA_VERSION,
        field: c.field.spec().clone(),
        levels: c.dims.clone(),
        boundaries: c
            .coboundaries
            .iter()
            .map(|d| sparse_to_json(&c.field, d))
            .collect(),
        labels: c.labels.clone(),
    }
}

pub fn complex_from_json(j: &ComplexJson) -> Result<ChainComplex, IoError> {
    if j.schema != SCHEMA_VERSION {
        return Err(IoError::BadSchema(j.schema));
    }
    let field = Arc::new(Field::from_spec(&j.field)?);
    let boundaries = j
        .boundaries
        .iter()
        .map(|b| sparse_from_json(&field, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChainComplex::new(
        field,
        j.levels.clone(),
        j.labels.clone(),
        boundaries,
    )?)
}

/// Polynomials: `[{"exp":[...],"coef":[coords]}]` in graded-lex term order.
#[derive(Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u16>,
    pub coef: Vec<u64>,
}

pub fn poly_to_json(field: &Field, p: &Polynomial) -> Vec<TermJson> {
    p.graded_lex_terms()
        .into_iter()
        .map(|(exp, c)| TermJson { exp, coef: fe_coords(field, c) })
        .collect()
}

pub fn poly_from_json(
    field: &Field,
    num_vars: usize,
    terms: &[TermJson],
) -> Result<Polynomial, IoError> {
    let mut p = Polynomial::zero(num_vars);
    for t in terms {
        if t.exp.len() != num_vars {
            return Err(IoError::Malformed("term exponent arity mismatch".into()));
        }
        p.add_term(field, t.exp.clone(), fe_from_coords(field, &t.coef)?);
    }
    Ok(p)
}

/// Multilinear form: factored (per-axis alpha vectors) or explicit entries.
#[derive(Debug, Serialize, Deserialize)]
pub struct FormJson {
    pub schema: u32,
    pub r: usize,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_factors: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<(Vec<usize>, Vec<u64>)>>,
}

pub fn entry_form_to_json(field: &Field, form: &crate::reduce::EntryForm) -> FormJson {
    FormJson {
        schema: SCHEMA_VERSION,
        r: form.r,
        mode: "entries".into(),
        alpha_factors: None,
        entries: Some(
            form.entries
                .iter()
                .map(|(idx, c)| (idx.clone(), fe_coords(field, *c)))
                .collect(),
        ),
    }
}

pub fn entry_form_from_json(
    field: &Field,
    slot_dims: Vec<usize>,
    j: &FormJson,
) -> Result<crate::reduce::EntryForm, IoError> {
    if j.schema != SCHEMA_VERSION {
        return Err(IoError::BadSchema(j.schema));
    }
    if j.mode != "entries" {
        return Err(IoError::Malformed(format!("expected entries mode, got {}", j.mode)));
    }
    let entries = j
        .entries
        .as_ref()
        .ok_or_else(|| IoError::Malformed("entries missing".into()))?
        .iter()
        .map(|(idx, coords)| {
            if idx.len() != j.r {
                return Err(IoError::Malformed("entry arity mismatch".into()));
            }
            for (h, &i) in idx.iter().enumerate() {
                if i >= slot_dims[h] {
                    return Err(IoError::Malformed("entry index out of range".into()));
                }
            }
            Ok((idx.clone(), fe_from_coords(field, coords)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(crate::reduce::EntryForm { r: j.r, slot_dims, entries })
}

/// A planted complex artifact: the chain complex plus a metadata block
/// recording the kind, the local degree, and the labeling it was built from.
#[derive(Debug, Serialize, Deserialize)]
pub struct PlantedJson {
    pub schema: u32,
    pub complex: ComplexJson,
    pub planted: PlantedMeta,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PlantedMeta {
    pub kind: u8,
    pub ell: usize,
    pub t: usize,
    pub labels: LabelingJson,
}

pub fn planted_to_json(cx: &crate::planted::RmPlantedComplex) -> PlantedJson {
    PlantedJson {
        schema: SCHEMA_VERSION,
        complex: complex_to_json(&cx.complex),
        planted: PlantedMeta {
            kind: cx.kind.number(),
            ell: cx.ell,
            t: cx.lift.t,
            labels: labeling_to_json(&cx.field, &cx.lift.labeling),
        },
    }
}

/// One named check in a run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

/// File digest entry of a manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// The run manifest printed to stdout by every CLI command. Timings are kept
/// out of `--out` artifacts so reruns stay byte-identical.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub checks: Vec<CheckResult>,
    pub timings_ms: BTreeMap<String, u128>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(data);
    hex::encode(hasher.finalize())
}
