//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input row; `row` is the 1-based line in the source file.
    #[error("parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error("empty input")]
    EmptyInput,

    /// A precondition violation on an operation argument.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A numeric failure (degenerate population, quadrature budget, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
