use thiserror::Error;

use crate::rg::FlowTrace;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("deformation parameter outside the analyticity strip: {0}")]
    Domain(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("mollifier violates its normalization: {0}")]
    Mollifier(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("eigenvalue {j} is not isolated (delta = {delta})")]
    Ungapped { j: usize, delta: f64 },

    #[error("spectral region invalid: {0}")]
    RegionInvalid(String),

    #[error("Neumann series does not converge (ratio estimate {ratio:.3e})")]
    NeumannDivergence { ratio: f64 },

    #[error("spectral parameter {0} lies outside the admissible square")]
    OutsideRegion(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("no eigenvalue of the kernel Hamiltonian in the stability disc: {0}")]
    StabilityRegion(String),

    #[error("fixed-point iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("renormalization flow left the polydisc at step {step}: {reason}")]
    FlowDivergence {
        step: usize,
        reason: String,
        trace: Box<FlowTrace>,
    },

    #[error("matrix dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("eigenvalue branch ambiguous at parameter {param} (overlap {overlap:.3})")]
    BranchAmbiguity { param: f64, overlap: f64 },

    #[error("eigenvector reconstruction failed: {0}")]
    Reconstruction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
