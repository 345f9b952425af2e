//! Error types shared by every pipeline stage.

use std::path::PathBuf;

use chrono::NaiveDate;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class, used by callers (notably the CLI) to map errors
/// onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// The request itself is malformed (bad ranges, bad parameters).
    Config,
    /// The input data violates a precondition of an operation.
    Data,
    /// A numerical procedure failed (decomposition, convergence).
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("date column {column:?} not found in header of {path}")]
    DateColumnNotFound { path: PathBuf, column: String },
    #[error("row {row}: unparsable date {value:?} (expected YYYY-MM-DD)")]
    UnparsableDate { row: usize, value: String },
    #[error("duplicate date {date}")]
    DuplicateDate { date: NaiveDate },
    #[error("duplicate column name {name:?}")]
    DuplicateColumn { name: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column:?}: unparsable number {value:?}")]
    UnparsableNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("panel has no data rows")]
    EmptyPanel,
    #[error("column {column:?} has no observed values")]
    EmptyColumn { column: String },
    #[error("column {column:?} has {rows} missing value(s) before its first observation")]
    LeadingMissing { column: String, rows: usize },
    #[error("split at {split_date} leaves the {side} side empty")]
    EmptySide {
        side: &'static str,
        split_date: NaiveDate,
    },
    #[error("operation requires a fully imputed panel ({count} missing cells present)")]
    MissingValues { count: usize },
    #[error("operation requires at least {min} rows, got {rows}")]
    TooFewRows { rows: usize, min: usize },
    #[error("column {column:?} has zero variance")]
    ZeroVariance { column: String },
    #[error("column mismatch: {detail}")]
    ColumnMismatch { detail: String },

    #[error("singular value decomposition failed ({detail})")]
    SvdFailed { detail: String },
    #[error("dimension {dim} out of range 1..={max}")]
    DimensionOutOfRange { dim: usize, max: usize },

    #[error("k={k} is invalid here (need {min} <= k <= {max})")]
    InvalidK { k: usize, min: usize, max: usize },
    #[error("k={k} exceeds the number of distinct points ({distinct})")]
    TooFewPoints { k: usize, distinct: usize },
    #[error("silhouette is undefined for a single cluster")]
    SingleCluster,

    #[error("expected exactly 2 classes, found {found}")]
    NotBinary { found: usize },
    #[error("class {label} has only {count} sample(s); need at least {min}")]
    ClassTooSmall {
        label: usize,
        count: usize,
        min: usize,
    },
    #[error("{kind}: covariance is singular even after regularization")]
    SingularCovariance { kind: &'static str },
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
    #[error("fold {fold}: {side} side is missing class {class}")]
    FoldMissingClass {
        fold: usize,
        side: &'static str,
        class: usize,
    },
    #[error("invalid fold count {folds} for {rows} rows")]
    InvalidFolds { folds: usize, rows: usize },
    #[error("{metric} requires both classes to be present")]
    OneClassMetric { metric: &'static str },
    #[error("{what} is empty")]
    EmptyInput { what: &'static str },
    #[error("{what} contains non-finite values")]
    NonFiniteInput { what: &'static str },
    #[error("{what}: length mismatch ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("date misalignment: {detail}")]
    DateMisalignment { detail: String },
    #[error("regime value {regime} at {date} is outside {{1, 2}}")]
    InvalidRegime { date: NaiveDate, regime: usize },
    #[error("{what} has zero variance")]
    ZeroVarianceSeries { what: &'static str },
    #[error("{what} needs at least {min} observations, got {n}")]
    TooFewObservations {
        what: &'static str,
        n: usize,
        min: usize,
    },
    #[error("report does not carry statistic {stat:?}")]
    MissingStat { stat: String },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap the error with the pipeline stage it occurred in. Errors already
    /// carrying a stage keep the innermost one.
    pub fn at_stage(self, stage: &'static str) -> Error {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// The stage recorded by [`Error::at_stage`], if any.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Stage { source, .. } => source.category(),
            Error::InvalidConfig { .. }
            | Error::InvalidK { .. }
            | Error::InvalidFolds { .. }
            | Error::DimensionOutOfRange { .. } => ErrorCategory::Config,
            Error::SvdFailed { .. }
            | Error::SingularCovariance { .. }
            | Error::NoConvergence { .. } => ErrorCategory::Numerical,
            _ => ErrorCategory::Data,
        }
    }
}
