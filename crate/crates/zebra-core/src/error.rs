use std::path::PathBuf;

use thiserror::Error;

/// Error type shared by all pipeline stages.
///
/// Variants mirror the failure classes surfaced to callers: schema and parse
/// problems in input tables, validation failures in pools and pair files,
/// lookup misses, and configuration mistakes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("lookup error: no profile for model `{0}`")]
    Lookup(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("audit error: {0}")]
    Audit(String),

    #[error("zero variance: paired differences are a non-zero constant")]
    ZeroVariance,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attaches a file path to an I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
