use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix or vector shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix that must be positive definite is not.
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// The problem instance is degenerate (e.g. vanishing residuals or
    /// identically zero data) and the requested quantity is undefined.
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed external input (CSV/JSON documents).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
