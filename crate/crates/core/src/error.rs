use thiserror::Error;

use crate::tree::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid merge tree: {0}")]
    InvalidTree(ValidationReport),

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("the root node cannot be used here: {0}")]
    RootNotAllowed(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-monotone filtration: {0}")]
    NonMonotone(String),

    #[error("inconsistent decoration inputs: {0}")]
    InconsistentDecoration(String),

    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    CapExceeded { size: f64, cap: f64 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
