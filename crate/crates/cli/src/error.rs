use ascal::CalibError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Calib(#[from] CalibError),

    #[error("{0}")]
    Usage(String),

    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Calib(CalibError::Io(e))
    }
}

/// Process exit codes, one per error family.
pub mod exit {
    pub const OK: i32 = 0;
    /// Invalid or inconsistent flags (clap's own usage errors also use 2).
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    /// Malformed input or model file.
    pub const PARSE: i32 = 4;
    /// Well-formed input with out-of-domain values.
    pub const DATA: i32 = 5;
    /// The data cannot support the requested fit or threshold.
    pub const CALIBRATION: i32 = 6;
    pub const MODEL_VERSION: i32 = 7;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use CalibError::*;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Json(_) => exit::IO,
            CliError::Calib(e) => match e {
                Io(_) => exit::IO,
                Parse { .. } | InvalidModel(_) => exit::PARSE,
                SimilarityOutOfRange { .. }
                | InvalidLabel { .. }
                | Range { .. }
                | DimensionMismatch { .. }
                | ZeroNorm
                | InvalidFolds(_) => exit::DATA,
                EmptyDataset
                | SingleClassDataset { .. }
                | DegenerateThreshold { .. }
                | InvalidThreshold { .. }
                | TooFewPerClass { .. } => exit::CALIBRATION,
                VersionMismatch(_) => exit::MODEL_VERSION,
                InvalidArgument(_) => exit::USAGE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
