//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset ingestion, scoring and training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("cannot parse {value:?} as a number at row {row}, column {column}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: String },

    #[error("dataset {path:?} is empty")]
    EmptyFile { path: String },

    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),

    #[error("dataset {name:?} has a single class; at least two are required")]
    SingleClass { name: String },

    #[error("{context}: need at least {needed} rows, got {got}")]
    TooFewRows {
        context: String,
        needed: usize,
        got: usize,
    },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: String,
        expected: String,
        got: String,
    },

    #[error("class {class} has no rows to sample from")]
    EmptyClass { class: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
