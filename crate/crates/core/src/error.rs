use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero-norm vector at column {index}")]
    ZeroVector { index: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("tau must lie in (0, 1), got {0}")]
    InvalidTau(f64),

    #[error("invalid label {0}: margin losses expect -1 or +1")]
    InvalidLabel(f64),

    #[error("invalid input: {name} {reason}")]
    InvalidInput { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("capacity exceeded: {units} units but only {capacity} theta-separated directions exist")]
    CapacityExceeded { units: usize, capacity: usize },

    #[error("power iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("objective diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("theta grid is empty")]
    EmptyGrid,

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
