//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, evaluation, and persistence routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A point, window, or ball leaves the domain it must lie in.
    #[error("domain violation: {0}")]
    Domain(String),

    /// Two objects that must share a shape or grid do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A scalar argument is outside its admissible range.
    #[error("out of range: {0}")]
    Range(String),

    /// A configuration document is inconsistent or incomplete.
    #[error("invalid config: {0}")]
    Config(String),

    /// Reading or writing a file failed.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    /// A JSON document could not be parsed or produced.
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
