use std::fmt;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: bad header: {message}")]
    BadHeader { file: String, message: String },

    #[error("{} row(s) rejected; first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Rejected(Vec<RowDiagnostic>),

    #[error("value {value} for {quality} is outside [0, 100]")]
    OutOfRange { quality: String, value: f64 },

    #[error("rating has no quality values")]
    EmptyVector,

    #[error("no ratings")]
    NoRatings,

    #[error("insufficient raters")]
    InsufficientRaters,

    #[error("split too small: need at least 3 clips, got {0}")]
    SplitTooSmall(usize),

    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate variance structure")]
    DegenerateVariance,

    #[error("zero variance in input")]
    ZeroVariance,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable class, used by the CLI's one-line error output.
    pub fn class(&self) -> &'static str {
        match self {
            Error::MissingFile(_) | Error::Io { .. } => "io",
            Error::BadHeader { .. } | Error::Rejected(_) | Error::Csv(_) => "format",
            Error::OutOfRange { .. } | Error::EmptyVector => "range",
            Error::NoRatings | Error::InsufficientRaters | Error::SplitTooSmall(_) => "data",
            Error::InvalidRatios(_) | Error::InvalidInput(_) | Error::LengthMismatch(..) => "input",
            Error::DegenerateVariance | Error::ZeroVariance => "numeric",
        }
    }
}

/// Why a single input row was rejected. `row` is the 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowDiagnostic {
    pub file: String,
    pub row: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: row {}: field `{}`: {}", self.file, self.row, self.field, self.message)
    }
}
