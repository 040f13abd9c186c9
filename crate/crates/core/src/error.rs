use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("label column not found: {0}")]
    LabelMissing(String),

    #[error("label cardinality mismatch: {0}")]
    LabelCardinality(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid beta spec: {0}")]
    InvalidBeta(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("non-finite training loss at round {round}")]
    NonFiniteLoss { round: usize },

    #[error("unsupported model version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("model schema violation: {0}")]
    Schema(String),

    #[error("model checksum mismatch")]
    Checksum,

    #[error("width {q}: {source}")]
    Width {
        q: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
