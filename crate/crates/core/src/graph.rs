//! Undirected multigraphs with optional bipartition and field-valued edges.

use crate::field::{Fe, Field};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("edge values must be injective (value repeated on edge {0})")]
    RepeatedEdgeValue(usize),
    #[error("edge {0} does not cross the bipartition")]
    NotBipartite(usize),
    #[error("graph is not regular: vertex {0} has degree {1}, expected {2}")]
    NotRegular(usize, usize, usize),
    #[error("need at least {0} vertices")]
    TooSmall(usize),
    #[error("n0 * delta = {0} exceeds field size {1}")]
    TooManyEdges(u64, u64),
    #[error("delta {0} is not a positive multiple of n0 {1}")]
    BadDegreeSplit(usize, usize),
    #[error("edge values missing")]
    MissingEdgeValues,
}

/// Undirected multigraph without self-loops. The stored endpoint order
/// `(v0, v1)` fixes an arbitrary orientation of each edge; for bipartite
/// graphs `v0` is on side 0 and `v1` on side 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    pub num_vertices: usize,
    /// (v0_count, v1_count) with side-0 vertices indexed first.
    pub bipartition: Option<(usize, usize)>,
    /// Edge endpoints by edge id.
    pub edges: Vec<(usize, usize)>,
    /// Optional injective field values on edges.
    pub edge_values: Option<Vec<Fe>>,
}

impl MultiGraph {
    pub fn new(
        num_vertices: usize,
        bipartition: Option<(usize, usize)>,
        edges: Vec<(usize, usize)>,
        edge_values: Option<Vec<Fe>>,
    ) -> Result<MultiGraph, GraphError> {
        if let Some((a, b)) = bipartition {
            assert_eq!(a + b, num_vertices, "bipartition sizes must sum to vertex count");
        }
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            assert!(u < num_vertices && v < num_vertices);
            if let Some((a, _)) = bipartition {
                if !(u < a && v >= a) {
                    return Err(GraphError::NotBipartite(id));
                }
            }
        }
        if let Some(vals) = &edge_values {
            assert_eq!(vals.len(), edges.len());
            let mut seen = std::collections::HashSet::new();
            for (id, &v) in vals.iter().enumerate() {
                if !seen.insert(v) {
                    return Err(GraphError::RepeatedEdgeValue(id));
                }
            }
        }
        Ok(MultiGraph { num_vertices, bipartition, edges, edge_values })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Edge ids incident to v, in id order.
    pub fn edges_at(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == v || b == v)
            .map(|(id, _)| id)
            .collect()
    }

    /// Checks Delta-regularity; returns Delta.
    pub fn regular_degree(&self) -> Result<usize, GraphError> {
        if self.num_vertices == 0 {
            return Err(GraphError::TooSmall(1));
        }
        let d0 = self.degree(0);
        for v in 1..self.num_vertices {
            let d = self.degree(v);
            if d != d0 {
                return Err(GraphError::NotRegular(v, d, d0));
            }
        }
        Ok(d0)
    }

    /// Dense adjacency matrix (multiplicity counts).
    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let n = self.num_vertices;
        let mut a = vec![vec![0.0; n]; n];
        for &(u, v) in &self.edges {
            a[u][v] += 1.0;
            a[v][u] += 1.0;
        }
        a
    }
}

/// Builds the Delta-regular complete balanced bipartite multigraph on
/// n0 + n0 vertices with exactly Delta/n0 parallel edges per vertex pair and
/// edge values taken as a prefix of the field enumeration.
pub fn build_base_graph(field: &Field, n0: usize, delta: usize) -> Result<MultiGraph, GraphError> {
    if n0 == 0 {
        return Err(GraphError::TooSmall(1));
    }
    if delta == 0 || delta % n0 != 0 {
        return Err(GraphError::BadDegreeSplit(delta, n0));
    }
    let num_edges = n0 * delta;
    if (num_edges as u64) > field.size() {
        return Err(GraphError::TooManyEdges(num_edges as u64, field.size()));
    }
    let per_pair = delta / n0;
    let mut edges = Vec::with_capacity(num_edges);
    let mut values = Vec::with_capacity(num_edges);
    let mut next = 0u64;
    for u in 0..n0 {
        for v in 0..n0 {
            for _ in 0..per_pair {
                edges.push((u, n0 + v));
                values.push(Fe(next as u32));
                next += 1;
            }
        }
    }
    MultiGraph::new(2 * n0, Some((n0, n0)), edges, Some(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_graph_shapes() {
        let f = Field::new(11, 1).unwrap();
        // n0=1, delta=1: single edge valued by one field element
        let g = build_base_graph(&f, 1, 1).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edge_values.as_ref().unwrap()[0], Fe(0));
        // n0=2, delta=4: 8 edges, 2 per pair
        let g = build_base_graph(&f, 2, 4).unwrap();
        assert_eq!(g.num_edges(), 8);
        assert_eq!(g.regular_degree().unwrap(), 4);
        for u in 0..2 {
            for v in 2..4 {
                let count = g.edges.iter().filter(|&&e| e == (u, v)).count();
                assert_eq!(count, 2);
            }
        }
        // n0*delta = q uses the whole field
        let g = build_base_graph(&f, 1, 11).unwrap();
        assert_eq!(g.num_edges(), 11);
        let mut vals: Vec<u32> = g.edge_values.unwrap().iter().map(|v| v.0).collect();
        vals.sort();
        assert_eq!(vals, (0..11).collect::<Vec<_>>());
        // too many edges
        assert!(matches!(build_base_graph(&f, 2, 6), Err(GraphError::TooManyEdges(12, 11))));
        // degree not multiple of n0
        assert!(build_base_graph(&f, 2, 3).is_err());
    }

    #[test]
    fn no_self_loops_and_injective_values() {
        assert!(MultiGraph::new(2, None, vec![(0, 0)], None).is_err());
        let f = Field::new(5, 1).unwrap();
        let _ = f;
        assert!(MultiGraph::new(
            2,
            None,
            vec![(0, 1), (0, 1)],
            Some(vec![Fe(1), Fe(1)])
        )
        .is_err());
    }
}
