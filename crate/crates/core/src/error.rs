use std::path::PathBuf;

use thiserror::Error;

use crate::action::SpecError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read `{}`: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("file has no header or no data rows")]
    EmptyFile,

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("line {line}, column `{column}`: cannot parse {value:?} as a finite real number")]
    NonNumericFeature { line: u64, column: String, value: String },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRows { line: u64, expected: usize, found: usize },

    #[error("non-finite value at observation {row}, feature {column}")]
    NonFinite { row: usize, column: usize },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },

    #[error("invalid class labels: {0}")]
    InvalidLabels(String),

    #[error("class `{0}` is not in the label set")]
    UnknownClass(String),

    #[error("feature index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("row count mismatch: {left} vs {right}")]
    RowCountMismatch { left: usize, right: usize },

    #[error("datasets carry conflicting targets")]
    TargetConflict,

    #[error("dataset has no targets")]
    MissingTargets,

    #[error("expected class-label targets, found {0:?}")]
    WrongTargetKind(crate::dataset::TargetKind),

    #[error("input has {found} features, action was trained on {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset has no observations")]
    EmptyDataSet,

    #[error("requested {requested} components, at most {max} available")]
    TooManyComponents { requested: usize, max: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("class {label} has {count} observations, need at least {min}")]
    TooFewPerClass { label: i64, count: usize, min: usize },

    #[error("expected a binary problem, found {0} classes")]
    NotBinary(usize),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("scores belong to a single class; ROC needs both")]
    OneClassOnly,

    #[error("expected a single score column, found {0}")]
    MultipleScoreColumns(usize),

    #[error("k = {k} is invalid for {n} observations (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pipeline emits no score column")]
    NoScoreColumn,

    #[error("decision contours need a 2-D classifier input, found {0} features")]
    ContourDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(transparent)]
    Spec(#[from] SpecError),
}
