use std::path::PathBuf;

use axum::http::StatusCode;
use serde::Serialize;

pub type Result<T> = std::result::Result<T, AnnotError>;

#[derive(Debug, thiserror::Error)]
pub enum AnnotError {
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Anchors {
        file: String,
        line: usize,
        message: String,
    },

    #[error("invalid anchor set: {0}")]
    AnchorSet(String),

    #[error("address {0} is already in use")]
    PortBusy(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Labels(#[from] voqual_core::Error),
}

impl AnnotError {
    pub fn class(&self) -> &'static str {
        match self {
            AnnotError::Io { .. } | AnnotError::PortBusy(_) => "io",
            AnnotError::Anchors { .. } | AnnotError::AnchorSet(_) => "format",
            AnnotError::Config(_) => "input",
            AnnotError::Labels(e) => e.class(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AnnotError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Error body returned by every endpoint: `{"code": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Problem {
    pub code: String,
    pub message: String,
}

/// A request-level failure with its HTTP status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub problem: Problem,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            problem: Problem {
                code: code.to_string(),
                message: message.into(),
            },
        }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn code(&self) -> &str {
        &self.problem.code
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", self.status.as_u16(), self.problem.code, self.problem.message)
    }
}

impl std::error::Error for ApiError {}

impl axum::response::IntoResponse for ApiError {
    fn into_response(self) -> axum::response::Response {
        (self.status, axum::Json(self.problem)).into_response()
    }
}
