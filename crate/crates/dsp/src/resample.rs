//! Band-limited sample-rate conversion.
//!
//! Polyphase windowed-sinc: 64 taps per output sample, Kaiser window
//! (β = 8), low-pass cutoff at 0.45 × the lower of the two sample rates
//! (0.9 × the lower Nyquist frequency). Each phase is normalized to unit DC
//! gain. Samples outside the input are treated as zero.

use crate::audio::AudioBuffer;
use crate::error::{DspError, Result};
use crate::window::{kaiser, sinc};

pub const TAPS: usize = 64;
pub const KAISER_BETA: f64 = 8.0;
/// Cutoff as a fraction of the lower sample rate.
pub const CUTOFF: f64 = 0.45;
pub const MIN_TARGET_HZ: u32 = 8000;

/// Phase tables larger than this are computed on the fly instead.
const MAX_TABLE_PHASES: u64 = 4096;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

struct Kernel {
    /// Cutoff in cycles per input sample.
    fc: f64,
    up: u64,
    table: Option<Vec<[f64; TAPS]>>,
}

impl Kernel {
    fn new(src: u32, dst: u32, up: u64) -> Self {
        let fc = CUTOFF * src.min(dst) as f64 / src as f64;
        let mut k = Kernel { fc, up, table: None };
        if up <= MAX_TABLE_PHASES {
            k.table = Some((0..up).map(|p| k.compute(p)).collect());
        }
        k
    }

    /// Taps for input offsets `base - 31 ..= base + 32` at fractional phase `p / up`.
    fn compute(&self, phase: u64) -> [f64; TAPS] {
        let frac = phase as f64 / self.up as f64;
        let half = (TAPS / 2) as f64;
        let mut taps = [0.0; TAPS];
        for (j, t) in taps.iter_mut().enumerate() {
            // input index = base - (TAPS/2 - 1) + j
            let x = frac + (TAPS / 2 - 1) as f64 - j as f64;
            *t = 2.0 * self.fc * sinc(2.0 * self.fc * x) * kaiser(x, half, KAISER_BETA);
        }
        let sum: f64 = taps.iter().sum();
        if sum != 0.0 {
            for t in &mut taps {
                *t /= sum;
            }
        }
        taps
    }

    fn taps(&self, phase: u64) -> std::borrow::Cow<'_, [f64; TAPS]> {
        match &self.table {
            Some(t) => std::borrow::Cow::Borrowed(&t[phase as usize]),
            None => std::borrow::Cow::Owned(self.compute(phase)),
        }
    }
}

/// Resamples to `target_hz`. A buffer already at the target rate is
/// returned unchanged. Output length is `round(len · target / source)`.
pub fn resample(buf: &AudioBuffer, target_hz: u32) -> Result<AudioBuffer> {
    if target_hz < MIN_TARGET_HZ {
        return Err(DspError::RateTooLow(target_hz));
    }
    let src = buf.sample_rate_hz();
    if src == target_hz {
        return Ok(buf.clone());
    }
    let g = gcd(src as u64, target_hz as u64);
    let up = target_hz as u64 / g;
    let down = src as u64 / g;
    let kernel = Kernel::new(src, target_hz, up);

    let input = buf.samples();
    let n_in = input.len() as u64;
    let n_out = ((n_in as u128 * target_hz as u128 + src as u128 / 2) / src as u128).max(1) as u64;
    let lead = (TAPS / 2 - 1) as i64;

    let mut out = Vec::with_capacity(n_out as usize);
    for j in 0..n_out {
        let num = j * down;
        let base = (num / up) as i64;
        let phase = num % up;
        let taps = kernel.taps(phase);
        let start = base - lead;
        let mut acc = 0.0;
        if start >= 0 && start + TAPS as i64 <= input.len() as i64 {
            let window = &input[start as usize..start as usize + TAPS];
            for (x, h) in window.iter().zip(taps.iter()) {
                acc += x * h;
            }
        } else {
            for (k, h) in taps.iter().enumerate() {
                let idx = start + k as i64;
                if idx >= 0 && (idx as u64) < n_in {
                    acc += input[idx as usize] * h;
                }
            }
        }
        out.push(acc.clamp(-1.0, 1.0));
    }
    AudioBuffer::new(out, target_hz, buf.clip_id())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, sr: u32, n: usize) -> AudioBuffer {
        let s = (0..n)
            .map(|i| 0.5 * (2.0 * PI * freq * i as f64 / sr as f64).sin())
            .collect();
        AudioBuffer::new(s, sr, "s").unwrap()
    }

    /// Naive DFT magnitude at integer-Hz bins, used as an independent oracle.
    fn dft_peak_hz(x: &[f64], sr: u32, max_hz: usize) -> usize {
        let n = x.len() as f64;
        (1..=max_hz)
            .map(|f| {
                let w = 2.0 * PI * f as f64 / sr as f64;
                let (mut re, mut im) = (0.0, 0.0);
                for (i, v) in x.iter().enumerate() {
                    re += v * (w * i as f64).cos();
                    im -= v * (w * i as f64).sin();
                }
                (f, (re * re + im * im).sqrt() / n)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    }

    #[test]
    fn identity_at_same_rate() {
        let b = sine(100.0, 16000, 1000);
        assert_eq!(resample(&b, 16000).unwrap(), b);
    }

    #[test]
    fn rejects_low_target() {
        let b = sine(100.0, 16000, 1000);
        assert!(matches!(resample(&b, 4000), Err(DspError::RateTooLow(4000))));
    }

    #[test]
    fn sine_peak_survives_downsampling() {
        let b = sine(100.0, 48000, 48000);
        let r = resample(&b, 16000).unwrap();
        assert_eq!(r.sample_rate_hz(), 16000);
        assert_eq!(dft_peak_hz(r.samples(), 16000, 400), 100);
        // amplitude preserved in the passband (ignore filter edges)
        let mid = &r.samples()[1000..15000];
        let peak = mid.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        assert!((peak - 0.5).abs() < 0.005, "{peak}");
    }

    #[test]
    fn length_tracks_duration() {
        let b = sine(100.0, 48000, 24000);
        let r = resample(&b, 16000).unwrap();
        assert!((r.len() as i64 - 8000).abs() <= 1);
        let b = sine(100.0, 44100, 22050);
        let r = resample(&b, 16000).unwrap();
        assert!((r.len() as i64 - 8000).abs() <= 1);
        let r = resample(&sine(100.0, 8000, 4000), 16000).unwrap();
        assert_eq!(r.len(), 8000);
    }

    #[test]
    fn stopband_attenuated() {
        // 12 kHz would alias to 4 kHz at 16 kHz without the anti-aliasing filter
        let b = sine(12000.0, 44100, 44100);
        let r = resample(&b, 16000).unwrap();
        let mid = &r.samples()[500..15500];
        let peak = mid.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        assert!(peak < 0.05, "{peak}");
    }

    #[test]
    fn rate_idempotent() {
        let b = sine(250.0, 44100, 4410);
        let once = resample(&b, 16000).unwrap();
        let twice = resample(&once, 16000).unwrap();
        assert_eq!(once, twice);
    }
}
