use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix still singular after adding {gamma:e}·I; increase gamma")]
    StillSingular { gamma: f64 },

    #[error("basis is rank deficient (Gram eigenvalue ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),

    #[error("parse error at row {row}, column {col}: {message}")]
    Parse { row: usize, col: usize, message: String },

    #[error("missing value at row {row}, column {col}")]
    MissingValue { row: usize, col: usize },

    #[error("response has a single class; at least two are required")]
    SingleClassResponse,

    #[error("response must be binary, found {classes} classes")]
    NotBinary { classes: usize },

    #[error("too few observations: {n} observations for {slices} slices (need at least {needed})")]
    TooFewObservations { n: usize, slices: usize, needed: usize },

    #[error("degenerate response: {distinct} distinct values for {slices} slices")]
    DegenerateResponse { distinct: usize, slices: usize },

    #[error("group {group} has {size} observations; at least 2 are required")]
    GroupTooSmall { group: usize, size: usize },

    #[error("requested dimension {d} exceeds available directions {p}")]
    DimensionTooLarge { d: usize, p: usize },

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("invalid standard deviation {0}; must be positive and finite")]
    InvalidSigma(f64),

    #[error("unknown configuration tag {0:?}")]
    InvalidTag(String),

    #[error("no rows to summarize")]
    EmptyInput,

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("value out of range in {context}: {value}")]
    OutOfRange { context: String, value: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidTag(_)
                | Error::Parse { .. }
                | Error::MissingValue { .. }
                | Error::SingleClassResponse
                | Error::NotBinary { .. }
                | Error::DimensionTooLarge { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidSigma(_)
                | Error::GroupTooSmall { .. }
                | Error::TooFewObservations { .. }
                | Error::DegenerateResponse { .. }
                | Error::EmptyTestSet
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
