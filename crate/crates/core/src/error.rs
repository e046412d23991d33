use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: feature indices must be strictly increasing ({previous} then {current})")]
    NonIncreasingIndex {
        line: usize,
        previous: usize,
        current: usize,
    },

    #[error("no rows")]
    NoRows,

    #[error("expected dimension {expected} is smaller than the largest feature index {max_index}")]
    DimensionTooSmall { expected: usize, max_index: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("row index {index} out of range for {n_rows} rows")]
    RowOutOfRange { index: usize, n_rows: usize },

    #[error("invalid sparse matrix: {0}")]
    InvalidMatrix(String),

    #[error("unknown loss family `{0}` (expected logistic or squared)")]
    UnknownLoss(String),

    #[error("unknown regularizer `{0}` (expected none, l1 or l2)")]
    UnknownRegularizer(String),

    #[error("label {label} at row {row} is not in {{-1, +1}}")]
    InvalidLabel { row: usize, label: f64 },

    #[error("invalid batch: {0}")]
    InvalidBatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Theory(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
