use thiserror::Error;

/// Errors raised by the library. Numerical "singular" outcomes of the local
/// solve are values, not errors; see [`crate::lp_estimator::LpSolution`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("missing derivative entry for multi-index {0:?}")]
    MissingDerivative(Vec<u32>),

    #[error("unsupported regression class: {0}")]
    UnsupportedClass(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("rate undefined; excess vanished")]
    RateUndefined,

    #[error("rate fit needs at least 3 points with positive excess, got {0}")]
    InsufficientPoints(usize),

    #[error("{0} is not available for this distribution")]
    Unavailable(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
