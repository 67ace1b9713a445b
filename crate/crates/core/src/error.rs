use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("sequence too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("point dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("missing value at index {0}")]
    MissingValue(usize),
    #[error("every value is missing")]
    AllMissing,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("MAPE is undefined: actual value at index {0} is zero")]
    UndefinedAtZero(usize),

    #[error("AR/MA polynomial {0:?} has a root on or inside the unit circle")]
    NonStationary(Vec<f64>),
    #[error("cannot rescale a constant sequence")]
    DegenerateRange,
    #[error("cannot place {requested} outliers in a sequence of length {len}")]
    TooManyOutliers { requested: usize, len: usize },

    #[error("loess span must lie in (0, 1], got {0}")]
    BadSpan(f64),

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("k = {k} exceeds the number of points {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("matrix has no rows")]
    EmptyMatrix,
    #[error("validity index needs at least two clusters")]
    SingleCluster,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("static branch mismatch: {0}")]
    StaticBranchMismatch(String),
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("model was trained for (n_train = {trained_n}, K = {trained_k}), asked for (n_train = {n_train}, K = {k})")]
    HorizonMismatch {
        trained_n: usize,
        trained_k: usize,
        n_train: usize,
        k: usize,
    },
    #[error("need at least {needed} records, got {got}")]
    InsufficientRecords { needed: usize, got: usize },

    #[error("schema error: {0}")]
    Schema(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("no valid multi-column subsets: dataset has {0} measurement column(s)")]
    NoValidSubsets(usize),
    #[error("run interrupted after {completed} new cells; rerun to resume")]
    Interrupted { completed: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad configuration or input files rather than
    /// failures during computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Schema(_)
                | Error::InvalidParameter { .. }
                | Error::NoValidSubsets(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
