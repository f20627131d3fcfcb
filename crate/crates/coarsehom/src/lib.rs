//! Finite-window computations in coarse geometry.
//!
//! The crate decides whether the class of a 0-chain on a finite window of a
//! model space vanishes in degree-0 uniformly finite homology, by reducing
//! the question to uniform-capacity flow feasibility and its min-cut dual.
//! Around that core it provides:
//!
//! - [`space`]: windows of model spaces (lattices, regular trees, products,
//!   custom graphs) with graph metric, vertex volumes, and escape sinks;
//! - [`chains`]: sparse 0- and 1-chains, the boundary operator, and the
//!   uniform-finiteness norms;
//! - [`decider`]: the capacity-minimisation solver, tail and obstruction
//!   certificates, the growth classifier, and the scalar-curvature verdict
//!   for infinite connected sums;
//! - [`amenability`]: isoperimetric profiles and regular-sequence search,
//!   cross-checked against the decider;
//! - [`spectral`]: graph-Laplacian spectra of discretised circles, tori and
//!   intervals, eigenvalue counting, and covering/packing bounds;
//! - [`suite`]: the built-in verification suite run by `coarsehom check-all`.
//!
//! Everything is deterministic: identical inputs (and seed, where one
//! applies) produce identical reports.

pub mod amenability;
pub mod chains;
pub mod decider;
pub mod error;
pub mod report;
pub mod space;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
