//! Frame-level low-level descriptors.
//!
//! One row per 25 ms frame with a 10 ms hop; a buffer of `n` samples yields
//! `floor((n - frame_len) / hop) + 1` rows. Each column carries a frame mask
//! that selects the frames its functionals are computed over:
//!
//! | columns                                   | mask                       |
//! |-------------------------------------------|----------------------------|
//! | `F0_hz`, `hnr_db`, `jitter_local`, `shimmer_local` | voiced frames     |
//! | spectral descriptors and MFCCs            | active frames              |
//! | `voicing_flag`, `rms_energy`, `zcr`       | all frames                 |
//!
//! A frame is active when its RMS exceeds 1e-4 and it holds no run of
//! digital silence (1 ms or more of exact zeros). Spectral flux is 0 on a
//! frame whose predecessor is inactive.
//!
//! Delta columns (`<name>_delta`) exist for every column except
//! `voicing_flag` and inherit their parent's mask. The delta at frame `t` is
//! `(x[t+1] - x[t-1]) / 2`, where a neighbour outside the mask or outside the
//! clip is replaced by `x[t]`.

use crate::audio::{rms, AudioBuffer};
use crate::error::{DspError, Result};
use crate::pitch::{track_pitch, PitchParams};
use crate::spectral::{SpectralAnalyzer, N_MFCC};

pub const FRAME_S: f64 = 0.025;
pub const HOP_S: f64 = 0.010;
/// Frames at or below this RMS count as silence for spectral functionals.
pub const ACTIVE_RMS: f64 = 1e-4;
/// A run of exact zeros at least this long marks digital silence.
pub const ZERO_RUN_S: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameMask {
    All,
    Voiced,
    Active,
}

/// Base descriptor names in column order, with their masks.
pub fn base_columns() -> Vec<(String, FrameMask)> {
    use FrameMask::*;
    let mut cols: Vec<(String, FrameMask)> = [
        ("F0_hz", Voiced),
        ("voicing_flag", All),
        ("rms_energy", All),
        ("zcr", All),
        ("spectral_centroid_hz", Active),
        ("spectral_rolloff85_hz", Active),
        ("spectral_flux", Active),
        ("spectral_slope", Active),
        ("hnr_db", Voiced),
        ("jitter_local", Voiced),
        ("shimmer_local", Voiced),
    ]
    .into_iter()
    .map(|(n, m)| (n.to_string(), m))
    .collect();
    cols.extend((1..=N_MFCC).map(|i| (format!("mfcc_{i}"), Active)));
    cols
}

/// All column names including deltas, in matrix order.
pub fn column_names() -> Vec<String> {
    let base = base_columns();
    let mut names: Vec<String> = base.iter().map(|(n, _)| n.clone()).collect();
    names.extend(
        base.iter()
            .filter(|(n, _)| n != "voicing_flag")
            .map(|(n, _)| format!("{n}_delta")),
    );
    names
}

pub fn frame_geometry(sample_rate_hz: u32) -> (usize, usize) {
    let sr = sample_rate_hz as f64;
    ((FRAME_S * sr).round() as usize, (HOP_S * sr).round() as usize)
}

pub fn frame_count(n_samples: usize, frame_len: usize, hop: usize) -> usize {
    if n_samples < frame_len {
        0
    } else {
        (n_samples - frame_len) / hop + 1
    }
}

/// Column-major descriptor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LldMatrix {
    names: Vec<String>,
    masks: Vec<FrameMask>,
    columns: Vec<Vec<f64>>,
    voiced: Vec<bool>,
    active: Vec<bool>,
}

impl LldMatrix {
    /// Builds a matrix from base columns; deltas are appended here.
    /// Every column must have `voiced.len()` rows.
    pub fn from_base(
        base: Vec<(String, FrameMask, Vec<f64>)>,
        voiced: Vec<bool>,
        active: Vec<bool>,
    ) -> Result<Self> {
        let n = voiced.len();
        if active.len() != n || base.iter().any(|(_, _, c)| c.len() != n) {
            return Err(DspError::InvalidBuffer("column length mismatch".into()));
        }
        let mut m = LldMatrix {
            names: Vec::new(),
            masks: Vec::new(),
            columns: Vec::new(),
            voiced,
            active,
        };
        let mut deltas = Vec::new();
        for (name, mask, col) in base {
            if name != "voicing_flag" {
                let d = delta(&col, m.mask_slice(mask));
                deltas.push((format!("{name}_delta"), mask, d));
            }
            m.names.push(name);
            m.masks.push(mask);
            m.columns.push(col);
        }
        for (name, mask, col) in deltas {
            m.names.push(name);
            m.masks.push(mask);
            m.columns.push(col);
        }
        Ok(m)
    }

    pub fn n_frames(&self) -> usize {
        self.voiced.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.column(i))
    }

    pub fn mask(&self, i: usize) -> FrameMask {
        self.masks[i]
    }

    pub fn voiced(&self) -> &[bool] {
        &self.voiced
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn n_voiced(&self) -> usize {
        self.voiced.iter().filter(|v| **v).count()
    }

    /// Frame indices selected by column `i`'s mask.
    pub fn selected_frames(&self, i: usize) -> Vec<usize> {
        let sel = self.mask_slice(self.masks[i]);
        (0..self.n_frames()).filter(|&t| sel.is_none_or(|s| s[t])).collect()
    }

    fn mask_slice(&self, mask: FrameMask) -> Option<&[bool]> {
        match mask {
            FrameMask::All => None,
            FrameMask::Voiced => Some(&self.voiced),
            FrameMask::Active => Some(&self.active),
        }
    }
}

fn delta(x: &[f64], sel: Option<&[bool]>) -> Vec<f64> {
    let on = |t: usize| sel.is_none_or(|s| s[t]);
    (0..x.len())
        .map(|t| {
            if !on(t) {
                return 0.0;
            }
            let prev = if t > 0 && on(t - 1) { x[t - 1] } else { x[t] };
            let next = if t + 1 < x.len() && on(t + 1) { x[t + 1] } else { x[t] };
            0.5 * (next - prev)
        })
        .collect()
}

fn has_zero_run(frame: &[f64], run: usize) -> bool {
    let mut len = 0;
    for s in frame {
        if *s == 0.0 {
            len += 1;
            if len >= run {
                return true;
            }
        } else {
            len = 0;
        }
    }
    false
}

fn zero_crossing_rate(frame: &[f64]) -> f64 {
    if frame.len() < 2 {
        return 0.0;
    }
    let crossings = frame
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count();
    crossings as f64 / (frame.len() - 1) as f64
}

/// Computes the descriptor matrix for a buffer at any rate (16 kHz is the
/// canonical analysis rate).
pub fn extract_llds(buf: &AudioBuffer) -> Result<LldMatrix> {
    extract_llds_with(buf, &PitchParams::default())
}

pub fn extract_llds_with(buf: &AudioBuffer, pitch: &PitchParams) -> Result<LldMatrix> {
    let sr = buf.sample_rate_hz();
    let (frame_len, hop) = frame_geometry(sr);
    let x = buf.samples();
    let n = frame_count(x.len(), frame_len, hop);
    if n == 0 {
        return Err(DspError::TooShort {
            samples: x.len(),
            needed: frame_len,
        });
    }

    let frames = |t: usize| &x[t * hop..t * hop + frame_len];
    let frame_rms: Vec<f64> = (0..n).map(|t| rms(frames(t))).collect();
    let zcr: Vec<f64> = (0..n).map(|t| zero_crossing_rate(frames(t))).collect();
    let run = ((ZERO_RUN_S * sr as f64).round() as usize).max(1);
    let active: Vec<bool> = (0..n)
        .map(|t| frame_rms[t] > ACTIVE_RMS && !has_zero_run(frames(t), run))
        .collect();

    let track = track_pitch(x, sr, frame_len, hop, &frame_rms, pitch);

    let mut analyzer = SpectralAnalyzer::new(sr, frame_len);
    let mut centroid = Vec::with_capacity(n);
    let mut rolloff = Vec::with_capacity(n);
    let mut flux = Vec::with_capacity(n);
    let mut slope = Vec::with_capacity(n);
    let mut mfcc: Vec<Vec<f64>> = (0..N_MFCC).map(|_| Vec::with_capacity(n)).collect();
    for t in 0..n {
        let s = analyzer.analyze(frames(t));
        centroid.push(s.centroid_hz);
        rolloff.push(s.rolloff_hz);
        flux.push(if t > 0 && active[t - 1] { s.flux } else { 0.0 });
        slope.push(s.slope_db_per_khz);
        for (col, v) in mfcc.iter_mut().zip(s.mfcc) {
            col.push(v);
        }
    }

    let voicing: Vec<f64> = track.voiced.iter().map(|v| if *v { 1.0 } else { 0.0 }).collect();
    let mut values = vec![
        track.f0_hz.clone(),
        voicing,
        frame_rms,
        zcr,
        centroid,
        rolloff,
        flux,
        slope,
        track.hnr_db(),
        track.jitter_local(),
        track.shimmer_local(),
    ];
    values.extend(mfcc);

    let base = base_columns()
        .into_iter()
        .zip(values)
        .map(|((name, mask), col)| (name, mask, col))
        .collect();
    LldMatrix::from_base(base, track.voiced, active)
}
