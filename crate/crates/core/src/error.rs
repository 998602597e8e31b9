//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("no parseable .csv files under {0}")]
    EmptyLake(PathBuf),

    #[error("dataset `{0}` not found in catalog")]
    DatasetNotFound(String),

    #[error("column `{dataset}`.`{column}` not found")]
    ColumnNotFound { dataset: String, column: String },

    #[error("empty column: {0}")]
    EmptyColumn(String),

    #[error("{what} out of range: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("need at least {need} {what}, got {got}")]
    TooFew {
        what: &'static str,
        need: usize,
        got: usize,
    },

    #[error("malformed profile file {path}: {message}")]
    MalformedProfile { path: PathBuf, message: String },

    #[error("malformed model file {path}: {message}")]
    MalformedModel { path: PathBuf, message: String },

    #[error("non-finite value in feature `{feature}` of pair {a} vs {b}")]
    NonFiniteFeature {
        feature: &'static str,
        a: String,
        b: String,
    },

    #[error("infeasible overlap schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("malformed ground truth {path}: {message}")]
    MalformedTruth { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
