use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Labels(#[from] voqual_core::Error),

    #[error(transparent)]
    Dsp(#[from] voqual_dsp::DspError),

    #[error(transparent)]
    Forest(#[from] voqual_forest::ForestError),

    #[error(transparent)]
    Annot(#[from] voqual_annot::AnnotError),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<HarnessError>,
    },
}

impl HarnessError {
    /// Short machine-readable class for the CLI's `error[<class>]` line.
    pub fn class(&self) -> &'static str {
        match self {
            HarnessError::Labels(e) => e.class(),
            HarnessError::Dsp(e) => e.class(),
            HarnessError::Forest(e) => e.class(),
            HarnessError::Annot(e) => e.class(),
            HarnessError::Io { .. } => "io",
            HarnessError::Config { .. } => "config",
            HarnessError::Input(_) => "input",
            HarnessError::Context { source, .. } => source.class(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        HarnessError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
