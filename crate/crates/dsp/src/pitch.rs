//! Frame-level F0 and voicing from the normalized cross-correlation.
//!
//! For every analysis frame a 40 ms window centered on the frame is mean
//! removed and its normalized autocorrelation
//!
//! ```text
//! r(τ) = Σ x[n]·x[n+τ] / sqrt(Σ x[n]² · Σ x[n+τ]²)
//! ```
//!
//! is searched over lags for 50–500 Hz. The earliest local maximum within
//! 90 % of the global maximum is refined by parabolic interpolation. A frame
//! is voiced when that peak exceeds 0.45 and the frame RMS exceeds 0.01. The
//! voiced F0 track is then median filtered (width 5, voiced neighbours only).

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchParams {
    pub window_s: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
    pub min_frame_rms: f64,
    pub median_width: usize,
    /// Local maxima within this fraction of the global peak are preferred
    /// when they occur at a shorter lag (guards against octave drops).
    pub octave_ratio: f64,
}

impl Default for PitchParams {
    fn default() -> Self {
        Self {
            window_s: 0.040,
            f0_min_hz: 50.0,
            f0_max_hz: 500.0,
            voicing_threshold: 0.45,
            min_frame_rms: 0.01,
            median_width: 5,
            octave_ratio: 0.9,
        }
    }
}

/// Per-frame pitch analysis. Unvoiced frames carry zeros in `f0_hz` and
/// `f0_raw_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    pub voiced: Vec<bool>,
    /// Median-filtered F0.
    pub f0_hz: Vec<f64>,
    /// F0 before median filtering.
    pub f0_raw_hz: Vec<f64>,
    /// Normalized autocorrelation peak (0 when no peak was found).
    pub strength: Vec<f64>,
    /// RMS of the analysis window.
    pub amplitude: Vec<f64>,
}

struct Correlator {
    window: usize,
    fft_len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    prefix: Vec<f64>,
}

impl Correlator {
    fn new(window: usize) -> Self {
        let fft_len = (2 * window).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            window,
            fft_len,
            fwd: planner.plan_fft_forward(fft_len),
            inv: planner.plan_fft_inverse(fft_len),
            buf: vec![Complex::new(0.0, 0.0); fft_len],
            prefix: vec![0.0; window + 1],
        }
    }

    /// Normalized autocorrelation of `x` (length `window`) for lags `0..=max_lag`.
    fn nccf(&mut self, x: &[f64], max_lag: usize) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.window);
        for (b, v) in self.buf.iter_mut().zip(x.iter().chain(std::iter::repeat(&0.0))) {
            *b = Complex::new(*v, 0.0);
        }
        self.fwd.process(&mut self.buf);
        for b in &mut self.buf {
            *b = Complex::new(b.norm_sqr(), 0.0);
        }
        self.inv.process(&mut self.buf);
        let scale = 1.0 / self.fft_len as f64;

        self.prefix[0] = 0.0;
        for (i, v) in x.iter().enumerate() {
            self.prefix[i + 1] = self.prefix[i] + v * v;
        }
        let w = self.window;
        (0..=max_lag)
            .map(|lag| {
                if lag >= w {
                    return 0.0;
                }
                let head = self.prefix[w - lag];
                let tail = self.prefix[w] - self.prefix[lag];
                let denom = (head * tail).sqrt();
                if denom <= 1e-20 {
                    0.0
                } else {
                    (self.buf[lag].re * scale / denom).clamp(-1.0, 1.0)
                }
            })
            .collect()
    }
}

/// Chooses the peak lag (fractional) and its strength from an NCCF curve.
fn pick_peak(r: &[f64], min_lag: usize, max_lag: usize, octave_ratio: f64) -> Option<(f64, f64)> {
    let lo = min_lag.max(1);
    let hi = max_lag.min(r.len() - 2);
    if lo > hi {
        return None;
    }
    let local_max: Vec<usize> = (lo..=hi)
        .filter(|&t| r[t] > 0.0 && r[t] >= r[t - 1] && r[t] >= r[t + 1])
        .collect();
    let global = local_max.iter().map(|&t| r[t]).fold(f64::NEG_INFINITY, f64::max);
    if !global.is_finite() {
        return None;
    }
    let t = *local_max.iter().find(|&&t| r[t] >= octave_ratio * global)?;
    let (a, b, c) = (r[t - 1], r[t], r[t + 1]);
    let denom = a - 2.0 * b + c;
    let delta = if denom.abs() > 1e-12 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let peak = (b - 0.25 * (a - c) * delta).min(1.0);
    Some((t as f64 + delta, peak))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs the tracker for `n_frames` frames of `frame_len` samples every `hop`.
/// `frame_rms` holds the RMS of each 25 ms frame for the energy gate.
pub fn track_pitch(
    samples: &[f64],
    sample_rate_hz: u32,
    frame_len: usize,
    hop: usize,
    frame_rms: &[f64],
    params: &PitchParams,
) -> PitchTrack {
    let n_frames = frame_rms.len();
    let sr = sample_rate_hz as f64;
    let window = ((params.window_s * sr).round() as usize).max(2);
    let min_lag = (sr / params.f0_max_hz).floor().max(2.0) as usize;
    let max_lag = ((sr / params.f0_min_hz).ceil() as usize).min(window - 2);
    let mut corr = Correlator::new(window);
    let mut seg = vec![0.0; window];

    let mut track = PitchTrack {
        voiced: vec![false; n_frames],
        f0_hz: vec![0.0; n_frames],
        f0_raw_hz: vec![0.0; n_frames],
        strength: vec![0.0; n_frames],
        amplitude: vec![0.0; n_frames],
    };

    for t in 0..n_frames {
        let center = (t * hop + frame_len / 2) as i64;
        let start = center - (window / 2) as i64;
        for (i, s) in seg.iter_mut().enumerate() {
            let idx = start + i as i64;
            *s = if idx >= 0 && (idx as usize) < samples.len() {
                samples[idx as usize]
            } else {
                0.0
            };
        }
        let mean = seg.iter().sum::<f64>() / window as f64;
        for s in &mut seg {
            *s -= mean;
        }
        track.amplitude[t] = crate::audio::rms(&seg);

        let r = corr.nccf(&seg, max_lag + 1);
        let Some((lag, peak)) = pick_peak(&r, min_lag, max_lag, params.octave_ratio) else {
            continue;
        };
        track.strength[t] = peak;
        let f0 = sr / lag;
        let in_range = (params.f0_min_hz..=params.f0_max_hz).contains(&f0);
        if peak > params.voicing_threshold && frame_rms[t] > params.min_frame_rms && in_range {
            track.voiced[t] = true;
            track.f0_raw_hz[t] = f0;
        }
    }

    let half = params.median_width / 2;
    for t in 0..n_frames {
        if !track.voiced[t] {
            continue;
        }
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(n_frames - 1);
        let mut neigh: Vec<f64> = (lo..=hi)
            .filter(|&i| track.voiced[i])
            .map(|i| track.f0_raw_hz[i])
            .collect();
        track.f0_hz[t] = median(&mut neigh).clamp(params.f0_min_hz, params.f0_max_hz);
    }
    track
}

impl PitchTrack {
    pub fn n_voiced(&self) -> usize {
        self.voiced.iter().filter(|v| **v).count()
    }

    /// Neighbouring voiced frame used for perturbation measures: the previous
    /// frame if voiced, otherwise the next one.
    fn partner(&self, t: usize) -> Option<usize> {
        if !self.voiced[t] {
            return None;
        }
        if t > 0 && self.voiced[t - 1] {
            Some(t - 1)
        } else if t + 1 < self.voiced.len() && self.voiced[t + 1] {
            Some(t + 1)
        } else {
            None
        }
    }

    /// Relative period perturbation between consecutive voiced frames.
    pub fn jitter_local(&self) -> Vec<f64> {
        (0..self.voiced.len())
            .map(|t| match self.partner(t) {
                Some(u) => {
                    let (a, b) = (1.0 / self.f0_raw_hz[t], 1.0 / self.f0_raw_hz[u]);
                    (a - b).abs() / (0.5 * (a + b))
                }
                None => 0.0,
            })
            .collect()
    }

    /// Relative amplitude perturbation between consecutive voiced frames.
    pub fn shimmer_local(&self) -> Vec<f64> {
        (0..self.voiced.len())
            .map(|t| match self.partner(t) {
                Some(u) => {
                    let (a, b) = (self.amplitude[t], self.amplitude[u]);
                    let m = 0.5 * (a + b);
                    if m > 0.0 {
                        (a - b).abs() / m
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            })
            .collect()
    }

    /// Autocorrelation harmonic-to-noise ratio `10·log10(r / (1 − r))`,
    /// with r capped at 0.999999 (60 dB). Zero on unvoiced frames.
    pub fn hnr_db(&self) -> Vec<f64> {
        (0..self.voiced.len())
            .map(|t| {
                if !self.voiced[t] {
                    return 0.0;
                }
                let r = self.strength[t].clamp(1e-6, 0.999_999);
                10.0 * (r / (1.0 - r)).log10()
            })
            .collect()
    }
}
