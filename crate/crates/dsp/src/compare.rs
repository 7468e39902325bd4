//! The compare-lite pipeline: resample, optionally RMS-normalize, extract
//! descriptors, apply functionals.
//!
//! The vector has 47 descriptor columns × 12 functionals plus the
//! `f0__imputed` flag, 565 values in all.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::{load_wav, normalize_rms, AudioBuffer, DEFAULT_TARGET_RMS};
use crate::error::Result;
use crate::features::FeatureVector;
use crate::functionals::{apply_functionals, feature_names};
use crate::lld::{column_names, extract_llds};
use crate::resample::resample;
use crate::CANONICAL_RATE_HZ;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareLiteConfig {
    pub target_rate_hz: u32,
    pub normalize: bool,
    pub target_rms: f64,
}

impl Default for CompareLiteConfig {
    fn default() -> Self {
        Self {
            target_rate_hz: CANONICAL_RATE_HZ,
            normalize: true,
            target_rms: DEFAULT_TARGET_RMS,
        }
    }
}

/// Ordered compare-lite feature names.
pub fn compare_lite_names() -> Vec<String> {
    feature_names(&column_names())
}

/// Buffer as the descriptors see it: canonical rate, optionally normalized.
pub fn prepare(buf: &AudioBuffer, cfg: &CompareLiteConfig) -> Result<AudioBuffer> {
    let b = resample(buf, cfg.target_rate_hz)?;
    if cfg.normalize {
        normalize_rms(&b, cfg.target_rms)
    } else {
        Ok(b)
    }
}

pub fn extract_compare_lite(buf: &AudioBuffer, cfg: &CompareLiteConfig) -> Result<FeatureVector> {
    let b = prepare(buf, cfg)?;
    Ok(apply_functionals(&extract_llds(&b)?))
}

pub fn extract_compare_lite_file(path: &Path, cfg: &CompareLiteConfig) -> Result<FeatureVector> {
    extract_compare_lite(&load_wav(path)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::DspError;
    use std::f64::consts::PI;

    /// Vowel-like test signal: a few harmonics with slow vibrato and a
    /// fixed noise floor.
    fn voice(f0: f64, amp: f64, secs: f64, sr: u32) -> AudioBuffer {
        let n = (secs * sr as f64) as usize;
        let mut phase = 0.0;
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let s = (0..n)
            .map(|i| {
                let t = i as f64 / sr as f64;
                phase += 2.0 * PI * f0 * (1.0 + 0.01 * (2.0 * PI * 5.0 * t).sin()) / sr as f64;
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let noise = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                let h: f64 = (1..=4).map(|k| (k as f64 * phase).sin() / k as f64).sum();
                amp * (0.6 * h + 0.05 * noise)
            })
            .collect();
        AudioBuffer::new(s, sr, "voice").unwrap()
    }

    #[test]
    fn length_and_names() {
        let v = extract_compare_lite(&voice(150.0, 0.2, 0.5, 16000), &CompareLiteConfig::default()).unwrap();
        assert_eq!(v.len(), 565);
        assert_eq!(v.names(), compare_lite_names().as_slice());
        assert!(v.values().iter().all(|x| x.is_finite()));
        assert_eq!(v.names()[0], "F0_hz__mean");
        assert_eq!(v.names()[564], "f0__imputed");
    }

    #[test]
    fn deterministic() {
        let b = voice(180.0, 0.2, 0.5, 22050);
        let cfg = CompareLiteConfig::default();
        let a = extract_compare_lite(&b, &cfg).unwrap();
        let c = extract_compare_lite(&b, &cfg).unwrap();
        assert!(a.values().iter().zip(c.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn octave_difference() {
        let cfg = CompareLiteConfig::default();
        let sine = |f: f64| {
            let s = (0..16000).map(|i| 0.3 * (2.0 * PI * f * i as f64 / 16000.0).sin()).collect();
            AudioBuffer::new(s, 16000, "s").unwrap()
        };
        let hi = extract_compare_lite(&sine(220.0), &cfg).unwrap();
        let lo = extract_compare_lite(&sine(110.0), &cfg).unwrap();
        let d = hi.get("F0_hz__mean").unwrap() - lo.get("F0_hz__mean").unwrap();
        assert!((d - 110.0).abs() < 3.0, "{d}");
    }

    #[test]
    fn gain_invariance_when_normalized() {
        let cfg = CompareLiteConfig::default();
        let base = voice(140.0, 0.1, 0.6, 16000);
        let a = extract_compare_lite(&base, &cfg).unwrap();
        for g in [0.2, 2.0, 3.0] {
            let scaled: Vec<f64> = base.samples().iter().map(|s| s * g).collect();
            let b = extract_compare_lite(&AudioBuffer::new(scaled, 16000, "v").unwrap(), &cfg).unwrap();
            for ((n, x), y) in a.names().iter().zip(a.values()).zip(b.values()) {
                assert!((x - y).abs() <= 1e-6, "gain {g}: {n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn unnormalized_keeps_level() {
        let cfg = CompareLiteConfig {
            normalize: false,
            ..Default::default()
        };
        let quiet = extract_compare_lite(&voice(140.0, 0.05, 0.5, 16000), &cfg).unwrap();
        let loud = extract_compare_lite(&voice(140.0, 0.2, 0.5, 16000), &cfg).unwrap();
        let (q, l) = (quiet.get("rms_energy__mean").unwrap(), loud.get("rms_energy__mean").unwrap());
        assert!((l / q - 4.0).abs() < 1e-9);
    }

    #[test]
    fn silent_input_rejected_when_normalizing() {
        let b = AudioBuffer::new(vec![0.0; 8000], 16000, "z").unwrap();
        assert!(matches!(
            extract_compare_lite(&b, &CompareLiteConfig::default()),
            Err(DspError::SilentClip)
        ));
        let v = extract_compare_lite(&b, &CompareLiteConfig { normalize: false, ..Default::default() }).unwrap();
        assert_eq!(v.get("f0__imputed"), Some(1.0));
        assert!(v.values().iter().all(|x| x.is_finite()));
    }
}
