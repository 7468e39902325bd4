//! Short-time spectral descriptors and MFCCs for one analysis frame.
//!
//! Frames are Hamming windowed and zero padded to the next power of two.
//! Centroid and roll-off weight bins by power. Flux is the Euclidean distance
//! between consecutive sum-normalized magnitude spectra. Slope is the
//! least-squares slope of the dB power spectrum against frequency in kHz.
//! MFCCs use 26 triangular HTK-mel filters spanning 0 Hz to Nyquist, natural
//! log energies and an orthonormal DCT-II; coefficients 1–13 are kept.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::window::hamming;

pub const N_MEL_FILTERS: usize = 26;
pub const N_MFCC: usize = 13;
pub const ROLLOFF_FRACTION: f64 = 0.85;
const LOG_FLOOR: f64 = 1e-10;
const DB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    pub centroid_hz: f64,
    pub rolloff_hz: f64,
    pub flux: f64,
    pub slope_db_per_khz: f64,
    pub mfcc: [f64; N_MFCC],
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters as `(first_bin, weights)` pairs.
fn mel_filterbank(n_filters: usize, n_bins: usize, fft_len: usize, sr: f64) -> Vec<(usize, Vec<f64>)> {
    let top = hz_to_mel(sr / 2.0);
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_filters + 1) as f64))
        .collect();
    let bin_hz = sr / fft_len as f64;
    (0..n_filters)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let mut first = None;
            let mut weights = Vec::new();
            for k in 0..n_bins {
                let f = k as f64 * bin_hz;
                let w = if f > lo && f <= mid {
                    (f - lo) / (mid - lo)
                } else if f > mid && f < hi {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                if w > 0.0 {
                    first.get_or_insert(k);
                    weights.push(w);
                } else if first.is_some() {
                    break;
                }
            }
            (first.unwrap_or(0), weights)
        })
        .collect()
}

/// Orthonormal DCT-II rows 1..=N_MFCC.
fn dct_matrix(n_in: usize) -> Vec<Vec<f64>> {
    let scale = (2.0 / n_in as f64).sqrt();
    (1..=N_MFCC)
        .map(|k| {
            (0..n_in)
                .map(|n| {
                    scale * (std::f64::consts::PI * k as f64 * (n as f64 + 0.5) / n_in as f64).cos()
                })
                .collect()
        })
        .collect()
}

pub struct SpectralAnalyzer {
    sr: f64,
    frame_len: usize,
    fft_len: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    filters: Vec<(usize, Vec<f64>)>,
    dct: Vec<Vec<f64>>,
    slope_x: Vec<f64>,
    prev_norm_mag: Option<Vec<f64>>,
}

impl SpectralAnalyzer {
    pub fn new(sample_rate_hz: u32, frame_len: usize) -> Self {
        let fft_len = frame_len.next_power_of_two();
        let n_bins = fft_len / 2 + 1;
        let sr = sample_rate_hz as f64;
        Self {
            sr,
            frame_len,
            fft_len,
            window: hamming(frame_len),
            fft: FftPlanner::new().plan_fft_forward(fft_len),
            buf: vec![Complex::new(0.0, 0.0); fft_len],
            filters: mel_filterbank(N_MEL_FILTERS, n_bins, fft_len, sr),
            dct: dct_matrix(N_MEL_FILTERS),
            slope_x: (0..n_bins).map(|k| k as f64 * sr / fft_len as f64 / 1000.0).collect(),
            prev_norm_mag: None,
        }
    }

    pub fn bin_hz(&self) -> f64 {
        self.sr / self.fft_len as f64
    }

    /// Power spectrum of one frame (bins 0..=fft_len/2).
    pub fn power_spectrum(&mut self, frame: &[f64]) -> Vec<f64> {
        debug_assert_eq!(frame.len(), self.frame_len);
        for (i, b) in self.buf.iter_mut().enumerate() {
            *b = if i < frame.len() {
                Complex::new(frame[i] * self.window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        self.fft.process(&mut self.buf);
        self.buf[..self.fft_len / 2 + 1]
            .iter()
            .map(|c| c.norm_sqr())
            .collect()
    }

    /// Analyses the next frame. Flux is measured against the previous frame
    /// passed to this method; call [`reset`](Self::reset) to break the chain.
    pub fn analyze(&mut self, frame: &[f64]) -> SpectralFrame {
        let power = self.power_spectrum(frame);
        let bin_hz = self.bin_hz();
        let total: f64 = power.iter().sum();

        let (centroid_hz, rolloff_hz) = if total > 0.0 {
            let centroid = power
                .iter()
                .enumerate()
                .map(|(k, p)| k as f64 * bin_hz * p)
                .sum::<f64>()
                / total;
            let target = ROLLOFF_FRACTION * total;
            let mut acc = 0.0;
            let mut roll = (power.len() - 1) as f64 * bin_hz;
            for (k, p) in power.iter().enumerate() {
                acc += p;
                if acc >= target {
                    roll = k as f64 * bin_hz;
                    break;
                }
            }
            (centroid, roll)
        } else {
            (0.0, 0.0)
        };

        let mag: Vec<f64> = power.iter().map(|p| p.sqrt()).collect();
        let mag_sum: f64 = mag.iter().sum();
        let norm_mag = (mag_sum > 0.0).then(|| mag.iter().map(|m| m / mag_sum).collect::<Vec<_>>());
        let flux = match (&self.prev_norm_mag, &norm_mag) {
            (Some(prev), Some(cur)) => prev
                .iter()
                .zip(cur)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt(),
            _ => 0.0,
        };
        self.prev_norm_mag = norm_mag;

        let slope_db_per_khz = if total > 0.0 {
            let db: Vec<f64> = power.iter().map(|p| 10.0 * (p + DB_FLOOR).log10()).collect();
            least_squares_slope(&self.slope_x, &db)
        } else {
            0.0
        };

        let mut log_mel = [0.0; N_MEL_FILTERS];
        for (m, (first, weights)) in self.filters.iter().enumerate() {
            let e: f64 = weights
                .iter()
                .enumerate()
                .map(|(j, w)| w * power[first + j])
                .sum();
            log_mel[m] = e.max(LOG_FLOOR).ln();
        }
        let mut mfcc = [0.0; N_MFCC];
        for (c, row) in mfcc.iter_mut().zip(&self.dct) {
            *c = row.iter().zip(&log_mel).map(|(a, b)| a * b).sum();
        }

        SpectralFrame {
            centroid_hz,
            rolloff_hz,
            flux,
            slope_db_per_khz,
            mfcc,
        }
    }

    pub fn reset(&mut self) {
        self.prev_norm_mag = None;
    }
}

pub(crate) fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
