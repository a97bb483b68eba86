use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario validation failed: {0}")]
    Validation(String),

    #[error("region path of length {len} does not fit into {steps} segments")]
    SequenceTooLong { len: usize, steps: usize },

    #[error("numerical failure in simplex: {0}")]
    NumericFailure(String),

    #[error("brute-force oracle refuses {binaries} binaries (limit {limit})")]
    OracleScaleExceeded { binaries: usize, limit: usize },

    #[error("duplicate or malformed variable name `{0}`")]
    BadName(String),

    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
