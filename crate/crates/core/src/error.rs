use std::io;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },

    #[error("line {line}: empty {column} field")]
    EmptyField { line: usize, column: &'static str },

    #[error("line {line}: input is not valid UTF-8")]
    Encoding { line: usize },

    #[error("unknown homograph {0:?}")]
    UnknownHomograph(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("store format error: {0}")]
    Format(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("degenerate (zero-norm) vector at {0}")]
    DegenerateVector(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid synthetic spec: {0}")]
    SynthSpec(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
