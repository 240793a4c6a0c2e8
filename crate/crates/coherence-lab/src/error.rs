use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tol:.3e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("Jacobi sweep did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:.3e}")]
    NotPsd { eigenvalue: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("probability vectors have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("alpha must be finite and strictly positive, got {0}")]
    BadAlpha(f64),

    #[error("alpha-logarithm requires a strictly positive argument, got {0}")]
    NonPositiveArgument(f64),

    #[error("alpha {0} is out of range for this operation (requires alpha in (0, 2])")]
    AlphaOutOfRange(f64),

    #[error("support of the first operator lies outside the support of the second")]
    SupportViolation,

    #[error("trace {trace:.12} differs from 1 beyond tolerance {tol:.3e}")]
    NotUnitTrace { trace: f64, tol: f64 },

    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("Kraus set does not satisfy the completeness relation: residual {0:.3e}")]
    NotTracePreserving(f64),

    #[error("Kraus operator {index} is not incoherent")]
    NotIncoherentKraus { index: usize },

    #[error("Kraus operators have heterogeneous output dimensions; lift to the block-column form first")]
    HeterogeneousOutputs,

    #[error("dimension {0} exceeds the brute-force limit of 6")]
    DimensionTooLarge(usize),

    #[error("requested rank {rank} is infeasible for dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("cannot cover {dim} input columns with total output capacity {capacity}")]
    InfeasibleShape { dim: usize, capacity: usize },

    #[error("divergence evaluated to {0:.3e}, below the internal consistency floor")]
    NegativeDivergence(f64),

    #[error("unknown coherence measure {0:?} (expected c_alpha, c_l1 or c_l2)")]
    UnknownMeasure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
