use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("format error at byte offset {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("class {label} has no samples")]
    EmptyClass { label: u8 },

    #[error("split `{0}` is empty")]
    EmptySplit(&'static str),

    #[error("non-finite loss at epoch {epoch} (train_mse={train_mse}, val_mse={val_mse})")]
    NonFiniteLoss { epoch: usize, train_mse: f64, val_mse: f64 },

    #[error("requested {requested} target samples but only {available} are available")]
    InsufficientTarget { requested: usize, available: usize },

    #[error("missing file {path}: {source}")]
    MissingFile { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
