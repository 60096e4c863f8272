//! Error type shared across the crate.

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("operator kinds or site counts do not match")]
    KindMismatch,
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("undefined result: {0}")]
    UndefinedResult(String),
    #[error("degenerate dual certificate: {0}")]
    DegenerateDual(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("solver error: {0}")]
    Solver(#[from] vembed_conic::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
