//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("custom graph is disconnected")]
    Disconnected,

    #[error("window would exceed the vertex budget of {budget} (needs > {attempted})")]
    BudgetExceeded { budget: usize, attempted: usize },

    #[error("unknown vertex id {0}")]
    UnknownVertex(u32),

    #[error("region is empty")]
    EmptyRegion,

    #[error("region covers the whole window; its boundary is undefined")]
    RegionCoversWindow,

    #[error("chain belongs to window {chain:#018x}, not {expected:#018x}")]
    WindowMismatch { chain: u64, expected: u64 },

    #[error("chain supports pair ({x}, {y}) at distance {dist}, beyond span {span}")]
    SpanExceeded { x: u32, y: u32, dist: u32, span: u32 },

    #[error("coefficient at {vertex} lies outside the window interior")]
    SupportOutsideInterior { vertex: u32 },

    #[error("flow divergence at vertex {vertex} is {got}, expected {expected} (tolerance {tol})")]
    DivergenceMismatch {
        vertex: u32,
        got: f64,
        expected: f64,
        tol: f64,
    },

    #[error("demand cannot escape: window has no sinks and the demand has nonzero total mass {total}")]
    NoEscape { total: f64 },

    #[error("capacity search did not converge; best bracket [{lo}, {hi}]")]
    NonConvergence { lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lambda {lambda} exceeds the computed spectrum cutoff {cutoff}")]
    AboveCutoff { lambda: f64, cutoff: f64 },

    #[error("epsilon {epsilon} is below the mesh resolution floor 2h = {floor}")]
    EpsilonBelowResolution { epsilon: f64, floor: f64 },

    #[error("spectrum too shallow: index {required} required, {available} available")]
    SpectrumDepth { required: usize, available: usize },

    #[error("eigensolver did not converge: {converged} of {required} pairs after {iterations} iterations")]
    EigenNonConvergence {
        converged: usize,
        required: usize,
        iterations: usize,
    },

    #[error("certificate failed verification: {0}")]
    CertificateInvalid(String),
}
