use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("matrix is empty after removing zero-degree lines")]
    EmptyMatrix,

    #[error("{what} {index} has no links")]
    ZeroDegree { what: &'static str, index: usize },

    #[error("matrix is not perfectly nested")]
    NotPerfectlyNested,

    #[error("inconsistent nested profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite score at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("diagonal crosses the empty region; use the blocked solver")]
    CrossingDetected,

    #[error("constant vector has no rank correlation")]
    ConstantVector,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("no records for year {0}")]
    EmptyYear(i64),
}

pub type Result<T> = std::result::Result<T, Error>;
