//! Crate-wide error type with coarse categories used for CLI exit codes.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A generator or manipulation spec violates its parameter domain.
    #[error("invalid parameter: {0}")]
    InvalidSpec(String),

    /// An operation needs more rows than the table provides.
    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    /// Malformed tabular input, with the offending location when known.
    #[error("format error at row {row}, column {col}: {msg}")]
    Format { row: usize, col: usize, msg: String },

    /// A manipulation was asked to run on features of an incompatible kind.
    #[error("no compatible features: {0}")]
    Applicability(String),

    /// Tensor or table dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Inference-mode batch norm before any running-stat update.
    #[error("batch norm running statistics are uninitialized; run a training pass or load a checkpoint first")]
    UninitializedStats,

    /// A loss term or gradient became NaN/Inf.
    #[error("non-finite value in {term}")]
    NonFinite { term: String },

    /// Checkpoint file problems: version, CRC, or shape disagreement.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Csv { path: PathBuf, msg: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code category: 2 for data problems, 3 for numeric ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite { .. } => 3,
            _ => 2,
        }
    }
}
