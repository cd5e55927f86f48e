use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point outside chart range: {0}")]
    OutOfRange(String),

    #[error("chart mismatch: expected {expected}, found {found}")]
    ChartMismatch { expected: String, found: String },

    #[error("zero-norm state cannot be normalized")]
    ZeroNorm,

    #[error("evaluation did not converge: {what} (residual estimate {residual:.3e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("grid under-resolves {what}: {detail}")]
    UnderResolved { what: String, detail: String },

    #[error("state is not evaluable off its sampling grid")]
    NotEvaluable,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
