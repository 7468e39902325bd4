use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, DspError>;

#[derive(Debug, thiserror::Error)]
pub enum DspError {
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("empty audio")]
    EmptyAudio,

    #[error("malformed wav: {0}")]
    Malformed(String),

    #[error("target rate {0} Hz is below the 8000 Hz minimum")]
    RateTooLow(u32),

    #[error("silent clip")]
    SilentClip,

    #[error("too short: {samples} samples, need at least {needed}")]
    TooShort { samples: usize, needed: usize },

    #[error("invalid buffer: {0}")]
    InvalidBuffer(String),

    #[error("unknown feature set `{0}`")]
    UnknownFeatureSet(String),

    #[error("{file}: row {row}: dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        file: String,
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("{file}: row {row}: non-finite value in column `{column}`")]
    NonFinite {
        file: String,
        row: usize,
        column: String,
    },

    #[error("{file}: {message}")]
    Table { file: String, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl DspError {
    pub fn class(&self) -> &'static str {
        match self {
            DspError::Io { .. } => "io",
            DspError::UnsupportedEncoding(_)
            | DspError::Truncated(_)
            | DspError::Malformed(_)
            | DspError::Table { .. }
            | DspError::DimensionMismatch { .. }
            | DspError::NonFinite { .. }
            | DspError::Csv(_) => "format",
            DspError::EmptyAudio | DspError::SilentClip | DspError::TooShort { .. } => "data",
            DspError::RateTooLow(_) | DspError::InvalidBuffer(_) | DspError::UnknownFeatureSet(_) => {
                "input"
            }
        }
    }
}
