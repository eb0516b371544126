use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("csv: {0}")]
    Csv(String),
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("row {row}, column `{column}`: `{value}` is not a finite number")]
    NonFinite {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: symbol `{value}` is not in the declared domain")]
    UnknownSymbol {
        row: usize,
        column: String,
        value: String,
    },
    #[error("cannot infer types: no data rows and no type hints")]
    CannotInferTypes,
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("column `{0}` must be numeric")]
    NotNumeric(String),
    #[error("column `{0}` must be nominal")]
    NotNominal(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("cluster {0} has no instances")]
    EmptyCluster(usize),
    #[error("node-visit budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
