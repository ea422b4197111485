//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by construction, propagation and solver routines.
#[derive(Debug, Error)]
pub enum QcError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("state not normalized: {0}")]
    NotNormalized(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("wavepacket support too close to the box boundary: {0}")]
    BoundarySupport(String),

    #[error("time step too large: {0}")]
    StepTooLarge(String),

    #[error("requested time outside the stored mean-field path: {0}")]
    TimeOutsidePath(String),

    #[error("marginal index out of range: {0}")]
    MarginalOutOfRange(String),

    #[error("marginal drift along coupled trajectory: {0}")]
    MarginalDrift(String),

    #[error("boundary mass policy violated: {0}")]
    BoundaryViolation(String),

    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),

    #[error("transport plan infeasible: {0}")]
    InfeasiblePlan(String),

    #[error("solver failed to converge: {0}")]
    SolverNotConverged(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QcError>;
