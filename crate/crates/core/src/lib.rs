//! Construction and brute-force certification of expander-lifted
//! Sipser-Spielman codes, product quantum codes with transversal
//! multi-controlled-Z gates, and balanced-product locally testable codes.
//!
//! The crate is organized around a small number of exact primitives:
//!
//! - [`field`]: GF(p^m) arithmetic, additive characters, traces.
//! - [`linalg`]: sparse exact linear algebra (rank, kernel, solve).
//! - [`poly`]: multivariate polynomials and grid interpolation.
//! - [`codes`]: evaluation codes (Reed-Solomon / Reed-Muller), duals,
//!   star products, and brute-force distance oracles.
//! - [`graph`] / [`spectral`]: multigraphs, abelian lifts, signed adjacency
//!   spectra, walk enumeration, low-bias label sets, and the lifted expander
//!   construction.
//! - [`complexes`]: chain complexes with local coefficient systems,
//!   Sipser-Spielman complexes, tensor/balanced products, and homology,
//!   distance, and expansion oracles.
//! - [`planted`]: the three Reed-Muller-planted one-dimensional complexes.
//! - [`family`]: product code families carrying a coboundary-invariant
//!   multilinear form, with subrank certificates.
//! - [`reduce`]: alphabet and locality reductions.
//! - [`statevec`]: a small qudit state-vector oracle for transversal gates.
//! - [`cltc`]: balanced-product locally testable codes with the
//!   multiplication property.
//! - [`io`]: JSON artifact schemas shared by the CLI.
//!
//! Building a product family and certifying its form end to end:
//!
//! ```
//! use cubecode::budget::Budget;
//! use cubecode::family::build_family;
//! use cubecode::field::Field;
//! use cubecode::graph::build_base_graph;
//! use cubecode::spectral::{build_lifted_graph, VertexLabeling};
//! use std::sync::Arc;
//!
//! let field = Arc::new(Field::new(7, 1)?);
//! let base = build_base_graph(&field, 1, 6)?;
//! let labeling = VertexLabeling::new(0, vec![vec![], vec![]]);
//! let lift = Arc::new(build_lifted_graph(&field, &base, &labeling)?);
//! let family = build_family(field, lift, 2, 3, Some(1))?;
//! let budget = Budget::default();
//! let invariance = family.coboundary_invariance_check(&budget)?;
//! assert_eq!(invariance.violations, 0);
//! let certificate = family.subrank_certificate(&budget, 0, 0)?;
//! assert!(certificate.exhaustive);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod budget;
pub mod field;
pub mod linalg;
pub mod poly;
pub mod codes;
pub mod graph;
pub mod spectral;
pub mod complexes;
pub mod planted;
pub mod family;
pub mod reduce;
pub mod statevec;
pub mod cltc;
pub mod io;
pub mod cli;

pub use field::{Fe, Field, FieldSpec};
