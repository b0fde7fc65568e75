use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A referenced input file is missing or unreadable.
    #[error("cannot ingest {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    /// A structurally invalid input document.
    #[error("parse error in {location}: {reason}")]
    Parse { location: String, reason: String },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Unsupported raster or container format.
    #[error("format error: {0}")]
    Format(String),

    /// Scene or parameter specification is invalid.
    #[error("invalid spec: {0}")]
    Spec(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("classification failed: {0}")]
    Classification(String),

    #[error("corrupt model file: {0}")]
    Deserialize(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}

pub(crate) fn ingestion(path: impl Into<PathBuf>, reason: impl ToString) -> Error {
    Error::Ingestion {
        path: path.into(),
        reason: reason.to_string(),
    }
}
