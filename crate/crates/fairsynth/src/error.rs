//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unparseable cell at row {row}, column `{column}`")]
    UnparseableCell { row: usize, column: String },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("target column has {0} observed categories, expected 2")]
    TargetNotBinary(usize),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("synthetic batch for subgroup {key} contradicts its key: {detail}")]
    SubgroupLabelMismatch { key: String, detail: String },
    #[error("class {class} has {have} rows, need at least {need} for {need} folds")]
    TooFewRowsPerClass {
        class: usize,
        have: usize,
        need: usize,
    },
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("strategy requires samples from empty subgroup {0}")]
    EmptyRequiredSubgroup(String),
    #[error("largest group has a degenerate class ratio ({0}); class-ratio strategy undefined")]
    DegenerateRatio(f64),
    #[error("empty count table")]
    EmptyCounts,
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("too few rows to fit generator: {0}")]
    TooFewRows(usize),
    #[error("generator not applicable: {0}")]
    NotApplicable(String),
    #[error("subgroup {key}: {source}")]
    Subgroup {
        key: String,
        #[source]
        source: Box<FitError>,
    },
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training data contains a single class")]
    SingleClassTraining,
    #[error("too few rows to train: {0}")]
    TooFewRows(usize),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("ROC AUC undefined: only one class present")]
    AucUndefined,
    #[error("all group rates undefined")]
    AllRatesUndefined,
    #[error("empty evaluation frame")]
    EmptyFrame,
}
