//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// The variants are grouped by how a caller should react: `Io` maps to
/// environment problems, `InvalidInput` to caller mistakes (bad parameters,
/// malformed files, violated preconditions), `Numerical` to failures inside
/// a solver that inputs alone cannot predict.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    InvalidInput(String),

    #[error("parse error in {path} at row {row}, column {column}: {message}")]
    Parse {
        path: String,
        /// 1-based data-row index (header excluded).
        row: usize,
        column: String,
        message: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
