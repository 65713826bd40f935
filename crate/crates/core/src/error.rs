use thiserror::Error;

/// Errors raised by the numerical kernels, models and experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular linear system (zero pivot at row {row})")]
    SingularSystem { row: usize },

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("trajectory diverged at step {step}")]
    Divergence { step: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("index {index} lies inside the warm-up window of {warmup} samples")]
    WarmupViolation { index: usize, warmup: usize },

    #[error("not enough data: need at least {needed} samples, got {got}")]
    DataTooShort { needed: usize, got: usize },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("rotation direction is indeterminate (zero signed area)")]
    Indeterminate,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
