use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence directory not found: {0}")]
    MissingDirectory(PathBuf),

    #[error("sequence too short: {path} has {frames} frame(s), need at least 2")]
    SequenceTooShort { path: PathBuf, frames: usize },

    #[error("dimension mismatch at {path}: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        path: PathBuf,
        expected_width: u32,
        expected_height: u32,
        width: u32,
        height: u32,
    },

    #[error("unsupported image format at {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("negative score {value} at index {index}")]
    NegativeScore { index: usize, value: f64 },

    #[error("class {0} has no training samples")]
    EmptyClass(usize),

    #[error("model has no centroids for {0}")]
    MissingKind(String),

    #[error("scores file {path}: {reason}")]
    Scores { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
