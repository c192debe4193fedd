//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by problem construction, solving, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    /// An index or vector length does not match the problem dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The instance exceeds a solver's size cap.
    #[error("problem too large: {0}")]
    Size(String),

    /// No feasible sample could be obtained for a subproblem.
    #[error("no feasible sample: {0}")]
    Infeasible(String),

    /// A file could not be read or written.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A file does not match the expected schema or version.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
