use thiserror::Error;

/// Errors raised anywhere in the calibration pipeline.
#[derive(Debug, Error)]
pub enum CalibError {
    #[error("similarity {value} is outside [-1, 1] beyond the float-noise tolerance")]
    SimilarityOutOfRange { value: f64 },

    #[error("label {value} is not -1 or +1")]
    InvalidLabel { value: i64 },

    #[error("threshold {value} must lie strictly inside (-1, 1)")]
    InvalidThreshold { value: f64 },

    #[error("calibrated threshold {value} left the open interval (-1, 1)")]
    DegenerateThreshold { value: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset contains only one class ({positives} positive, {negatives} negative)")]
    SingleClassDataset { positives: usize, negatives: usize },

    #[error("vector dimensions differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("class {label:+} has {count} records, fewer than the {k} folds requested")]
    TooFewPerClass { label: i8, count: usize, k: usize },

    #[error("invalid fold assignment: {0}")]
    InvalidFolds(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: {message}")]
    Range { line: u64, message: String },

    #[error("invalid model file: {0}")]
    InvalidModel(String),

    #[error("unsupported model file: {0}")]
    VersionMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CalibError> = std::result::Result<T, E>;
