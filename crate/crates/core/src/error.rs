use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by matrix construction, I/O, blocking and experiment runs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a permutation of 0..{len}: {reason}")]
    InvalidPermutation { len: usize, reason: String },

    #[error("invalid column partition: {0}")]
    InvalidPartition(String),

    #[error("invalid row grouping: {0}")]
    InvalidGrouping(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix has no nonzeros; blocking statistics are undefined")]
    EmptyMatrix,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("unsupported MatrixMarket header: {0}")]
    UnsupportedFormat(String),

    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
