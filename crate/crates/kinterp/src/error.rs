use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("dataset needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("points/values length mismatch: {points} points vs {values} values")]
    LengthMismatch { points: usize, values: usize },

    #[error("split ratio {0} outside (0, 1)")]
    InvalidRatio(f64),

    #[error("split would leave an empty partition (N={n}, ratio={ratio})")]
    EmptySplit { n: usize, ratio: f64 },

    #[error("temperature must be positive and finite, got {0}")]
    InvalidTheta(f64),

    #[error("training data has zero variance")]
    ZeroVariance,

    #[error("k-nearest-neighbor k={k} requires more than k points, got {n}")]
    KnnTooLarge { k: usize, n: usize },

    #[error("csv error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("linear system is singular or rank-deficient")]
    SingularSystem,

    #[error("RBF factorization failed (ridge escalated to {ridge:.1e}): {diagnostic}")]
    RbfFactorization { ridge: f64, diagnostic: String },

    #[error("sample size must be at least 2, got {0}")]
    SampleTooSmall(usize),

    #[error("model/query dimension mismatch: model is {expected}-dimensional, query is {found}-dimensional")]
    QueryDimension { expected: usize, found: usize },

    #[error("unsupported model schema version {0}")]
    SchemaVersion(u32),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidRatio(_)
            | Error::InvalidTheta(_)
            | Error::SampleTooSmall(_)
            | Error::Config(_) => 1,
            Error::NonFinite { .. }
            | Error::TooFewPoints { .. }
            | Error::DimensionMismatch { .. }
            | Error::LengthMismatch { .. }
            | Error::EmptySplit { .. }
            | Error::KnnTooLarge { .. }
            | Error::Csv { .. }
            | Error::QueryDimension { .. }
            | Error::SchemaVersion(_)
            | Error::Io { .. }
            | Error::Json(_) => 2,
            Error::ZeroVariance
            | Error::SingularSystem
            | Error::RbfFactorization { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
