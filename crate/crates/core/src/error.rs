use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Hurst index must lie in the open interval (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid time argument {0}: times must be non-negative")]
    NegativeTime(f64),

    /// Pivot `index` (0-based increment index) fell below the relative pivot floor.
    #[error("covariance is not positive definite: pivot {index} is {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
