use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input file not found: {0}")]
    MissingFile(PathBuf),
    #[error("malformed line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: &'static str, reason: String },
    #[error("split `{0}` would be empty although its ratio is positive")]
    DegenerateSplit(&'static str),
    #[error("interaction log is empty")]
    EmptyLog,
    #[error("train split is empty")]
    EmptyTrainSplit,
    #[error("dense operation on size {requested} exceeds the cap of {cap}")]
    SizeCap { requested: usize, cap: usize },
    #[error("K = {k} exceeds min(|U|, |I|) = {max}")]
    KTooLarge { k: usize, max: usize },
    #[error("singular vectors lost orthonormality (max deviation {deviation:e})")]
    ConvergenceFailure { deviation: f64 },
    #[error("Frobenius total {total} is below the partial energy {partial}")]
    InvalidTotal { total: f64, partial: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("delta must be even and >= 2, got {0}")]
    OddDelta(usize),
    #[error("unknown user id {0}")]
    UnknownUser(usize),
    #[error("band [{lo}, {hi}] outside available spectrum of length {len}")]
    BandOutOfRange { lo: usize, hi: usize, len: usize },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("no user has a non-empty evaluation set")]
    NoEvaluableUsers,
    #[error("validation split is empty")]
    EmptyValidation,
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            key,
            reason: reason.into(),
        }
    }
}
