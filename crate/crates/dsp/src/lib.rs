//! Audio front end and per-clip feature vectors.
//!
//! Audio is decoded to mono `f64` in `[-1, 1]` ([`audio`]), resampled to the
//! canonical 16 kHz rate ([`resample`]) and optionally RMS-normalized. The
//! `compare-lite` acoustic set is built from frame-level low-level
//! descriptors ([`lld`]) summarized by twelve functionals ([`functionals`]).
//! Precomputed articulatory and self-supervised embeddings come in through
//! [`embedding`].

pub mod audio;
pub mod compare;
pub mod embedding;
pub mod error;
pub mod features;
pub mod functionals;
pub mod lld;
pub mod pitch;
pub mod resample;
pub mod spectral;
mod window;

pub use audio::{load_wav, normalize_rms, write_wav_pcm16, AudioBuffer};
pub use compare::{extract_compare_lite, CompareLiteConfig};
pub use embedding::load_embedding_table;
pub use error::{DspError, Result};
pub use features::{FeatureSetId, FeatureVector};
pub use functionals::apply_functionals;
pub use lld::{extract_llds, LldMatrix};
pub use resample::resample;

/// Canonical analysis rate.
pub const CANONICAL_RATE_HZ: u32 = 16_000;
