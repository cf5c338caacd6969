use thiserror::Error;

/// Errors surfaced by the library and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("classifier weight vector is zero; sign is undefined")]
    ZeroWeights,

    #[error("epsilon {0} is outside [0, 1/2); pass the large-epsilon override to allow it")]
    EpsilonOutOfRange(f64),

    #[error(
        "materializing {points} points of dimension {dim} exceeds the budget of {budget} \
         coordinates; enable the fast sampler"
    )]
    MemoryBudget {
        points: usize,
        dim: usize,
        budget: usize,
    },

    #[error("base classifier failed: {0}")]
    Oracle(String),

    #[error("config: line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
