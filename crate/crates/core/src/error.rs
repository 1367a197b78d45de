//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("predetermined index sets overlap ({0} indices); lower beta1 or raise beta2")]
    PredeterminedOverlap(usize),

    #[error("code construction over-constrained: {0}")]
    OverConstrained(String),

    #[error("malformed code file: {0}")]
    CodeFile(String),

    #[error("no result rows to write")]
    EmptyRows,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
