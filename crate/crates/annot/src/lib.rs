//! Crowd annotation service for perceptual voice quality ratings.
//!
//! Raters request a clip, listen to it and to per-quality anchor examples,
//! and submit all seven ratings at once. Ratings go to an append-only
//! JSON-lines log that is the single source of truth; assignment state is
//! rebuilt from it on restart.
//!
//! [`service::AnnotService`] holds the logic and [`http::router`] exposes it.

pub mod anchors;
pub mod assign;
pub mod clock;
pub mod error;
pub mod http;
pub mod log;
pub mod service;

pub use anchors::{load_anchors_or_warn, read_anchors, AnchorExample, Pole};
pub use assign::{AssignmentState, DEFAULT_EXPIRY_MINUTES, DEFAULT_REDUNDANCY};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{AnnotError, ApiError, Problem, Result};
pub use http::{bind, router, serve};
pub use service::{
    Ack, AnnotService, Corpus, LiveAgreement, NextResponse, RatingSubmission, ServiceConfig,
};
