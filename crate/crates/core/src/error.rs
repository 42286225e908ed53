//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration: shapes, pooling counts, schedule arithmetic.
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse: empty inputs, zero budgets, calls out of order.
    #[error("usage error: {0}")]
    Usage(String),

    /// A metric was asked for a quantity the prediction does not carry.
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Feature file header or payload does not match the ALCV1 format.
    #[error("bad tensor file {path}: {detail}")]
    BadTensorFile { path: PathBuf, detail: String },

    #[error("manifest row {row}: feature file {path} cannot be read: {source}")]
    ManifestMissingFile {
        row: usize,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest row {row}: shape mismatch: {detail}")]
    ManifestShape { row: usize, detail: String },

    #[error("manifest row {row}: duplicate sample id {id}")]
    ManifestDuplicateId { row: usize, id: u64 },

    #[error("manifest row {row}: bad label field: {detail}")]
    ManifestLabel { row: usize, detail: String },

    #[error("manifest row {row}: {detail}")]
    ManifestRow { row: usize, detail: String },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
