use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loading, synthesis, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("missing data file for table `{table}`: {path}")]
    MissingTableFile { table: String, path: PathBuf },

    #[error("table `{table}`, row {row}, column `{column}`: value `{value}` outside declared domain")]
    DomainViolation {
        table: String,
        column: String,
        row: usize,
        value: String,
    },

    #[error("table `{table}`, row {row}, column `{column}`: missing value")]
    MissingValue {
        table: String,
        column: String,
        row: usize,
    },

    #[error("table `{table}`, row {row}: foreign key `{column}` = {value} has no matching primary key in `{target}`")]
    BrokenReference {
        table: String,
        column: String,
        row: usize,
        value: i64,
        target: String,
    },

    #[error("table `{table}`: duplicate primary key value {value}")]
    DuplicatePrimaryKey { table: String, value: i64 },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("privacy budget violation: {0}")]
    Budget(String),

    #[error("query error: {0}")]
    Query(String),

    #[error("codec error: {0}")]
    Codec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
