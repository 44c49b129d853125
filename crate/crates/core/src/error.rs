use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("header mismatch: expected [{expected}], found [{found}]")]
    HeaderMismatch { expected: String, found: String },

    #[error("row {row}, column \"{column}\": cannot parse {value:?} as a number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error("dataset too small: {needed} samples required, {found} available")]
    TooFewSamples { needed: usize, found: usize },

    #[error("feature \"{0}\" has zero variance in the training set")]
    ZeroVariance(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training diverged at epoch {epoch}: objective is not finite")]
    Diverged { epoch: usize },

    #[error("actual value is zero at index {index}; the relative tolerance rule is undefined there, use the range rule")]
    ZeroActual { index: usize },

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error("model checksum mismatch: stored {stored}, computed {computed}")]
    ChecksumMismatch { stored: String, computed: String },

    #[error("malformed model file: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
