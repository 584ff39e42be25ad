use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}, column {col}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: label {value} is not 0 or 1")]
    BadLabel { row: usize, value: f64 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("fitness evaluation failed for bat {bat} at iteration {iteration}: {message}")]
    Fitness {
        bat: usize,
        iteration: usize,
        message: String,
    },
}

impl Error {
    /// Stable machine-readable category, printed by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::NonNumeric { .. }
            | Error::RowLength { .. }
            | Error::BadLabel { .. }
            | Error::Csv(_) => "data",
            Error::Json(_) => "format",
            Error::Dimension { .. } => "dimension",
            Error::Empty(_) | Error::Degenerate(_) => "degenerate",
            Error::InvalidParam(_) => "config",
            Error::Fitness { .. } => "fitness",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
