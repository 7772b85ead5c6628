use std::io;

use thiserror::Error;

pub type Result<T, E = OdaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum OdaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {index} = {value} is outside the divergence domain")]
    DomainViolation { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("observation stream is empty")]
    EmptyStream,

    #[error("corrupted learner state: {0}")]
    CorruptState(String),

    #[error("cell {cell} has zero estimated volume")]
    ZeroVolume { cell: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("line {line}: {message}")]
    Data { line: usize, message: String },

    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("snapshot encoding: {0}")]
    Snapshot(#[from] serde_json::Error),
}

impl OdaError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        OdaError::InvalidConfig(msg.into())
    }

    pub(crate) fn data(line: usize, msg: impl Into<String>) -> Self {
        OdaError::Data {
            line,
            message: msg.into(),
        }
    }
}
