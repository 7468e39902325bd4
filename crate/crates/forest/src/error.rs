use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, ForestError>;

#[derive(Debug, thiserror::Error)]
pub enum ForestError {
    #[error("empty input")]
    EmptyInput,

    #[error("no features (d = 0)")]
    NoFeatures,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("feature set mismatch: model uses `{expected}`, input is `{got}`")]
    FeatureSetMismatch { expected: String, got: String },

    #[error("feature names differ from the model's at position {0}")]
    FeatureNameMismatch(usize),

    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),

    #[error("need at least {needed} samples for min_samples_leaf, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("singular system with l2_weight = 0; use l2_weight > 0")]
    SingularSystem,

    #[error("empty hyperparameter grid")]
    EmptyGrid,

    #[error("every grid point failed; last error: {0}")]
    AllGridPointsFailed(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
}

impl ForestError {
    pub fn class(&self) -> &'static str {
        match self {
            ForestError::Io { .. } => "io",
            ForestError::Json(_) | ForestError::UnsupportedVersion(_) => "format",
            ForestError::SingularSystem => "numeric",
            ForestError::EmptyInput | ForestError::TooFewSamples { .. } => "data",
            _ => "input",
        }
    }
}
