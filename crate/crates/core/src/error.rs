use thiserror::Error;

/// Errors raised by the schedulers, solvers and simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input at hypothesis {index}: {message}")]
    InvalidInput { index: usize, message: String },
    #[error("index {0} out of range (hypotheses are indexed from 1)")]
    Index(usize),
    #[error("invariant violated at hypothesis {index}: {message}")]
    InvariantViolation { index: usize, message: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("configuration mismatch: {0}")]
    Mismatch(String),
    #[error("incomplete trace: {0}")]
    IncompleteTrace(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
