//! Mono sample buffers, WAV decoding/encoding and level normalization.

use std::path::Path;

use crate::error::{DspError, Result};

/// Default RMS target for level normalization.
pub const DEFAULT_TARGET_RMS: f64 = 0.05;
/// Peak ceiling applied when normalization would clip.
pub const PEAK_LIMIT: f64 = 0.99;

/// Mono samples in `[-1, 1]` at a known rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    clip_id: String,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32, clip_id: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(DspError::EmptyAudio);
        }
        if sample_rate_hz == 0 {
            return Err(DspError::InvalidBuffer("sample rate must be positive".into()));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(DspError::InvalidBuffer(format!(
                "sample {i} = {} is outside [-1, 1]",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            clip_id: clip_id.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn clip_id(&self) -> &str {
        &self.clip_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn with_clip_id(mut self, clip_id: impl Into<String>) -> Self {
        self.clip_id = clip_id.into();
        self
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<f64>, sample_rate_hz: u32, clip_id: String) -> Self {
        debug_assert!(samples.iter().all(|s| s.abs() <= 1.0));
        Self {
            samples,
            sample_rate_hz,
            clip_id,
        }
    }
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

fn map_hound(path: &Path, e: hound::Error) -> DspError {
    match e {
        // hound reports a short data chunk as a custom io error
        hound::Error::IoError(io)
            if io.kind() == std::io::ErrorKind::UnexpectedEof
                || io.to_string().contains("enough bytes") =>
        {
            DspError::Truncated(path.display().to_string())
        }
        hound::Error::IoError(source) => DspError::Io {
            path: path.to_path_buf(),
            source,
        },
        hound::Error::Unsupported => DspError::UnsupportedEncoding("unsupported wav format".into()),
        hound::Error::TooWide | hound::Error::InvalidSampleFormat => {
            DspError::UnsupportedEncoding(e.to_string())
        }
        hound::Error::UnfinishedSample => DspError::Truncated(path.display().to_string()),
        hound::Error::FormatError(msg) => DspError::Malformed(msg.to_string()),
    }
}

/// Decodes a 16-bit PCM or 32-bit float WAV file with one or two channels.
///
/// Channels are averaged to mono. PCM values are divided by 32768; float
/// samples are clamped into `[-1, 1]`. The clip id is the file stem.
pub fn load_wav(path: &Path) -> Result<AudioBuffer> {
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(DspError::UnsupportedEncoding(format!(
            "{} channels (only mono or stereo)",
            spec.channels
        )));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (fmt, bits) => {
            return Err(DspError::UnsupportedEncoding(format!(
                "{bits}-bit {fmt:?} (only 16-bit PCM or 32-bit float)"
            )))
        }
    };
    if interleaved.is_empty() {
        return Err(DspError::EmptyAudio);
    }
    let ch = spec.channels as usize;
    if !interleaved.len().is_multiple_of(ch) {
        return Err(DspError::Truncated(path.display().to_string()));
    }
    let mono: Vec<f64> = if ch == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(2)
            .map(|f| (f[0] + f[1]) * 0.5)
            .collect()
    };
    let clip_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    AudioBuffer::new(mono, spec.sample_rate, clip_id)
}

fn to_i16(s: f64) -> i16 {
    (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Writes a mono 16-bit PCM WAV file.
pub fn write_wav_pcm16(path: &Path, buf: &AudioBuffer) -> Result<()> {
    write_wav_channels_pcm16(path, &[buf.samples()], buf.sample_rate_hz())
}

/// Writes interleaved 16-bit PCM from equally long channel slices.
pub fn write_wav_channels_pcm16(path: &Path, channels: &[&[f64]], sample_rate_hz: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate: sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    let len = channels.first().map_or(0, |c| c.len());
    for i in 0..len {
        for c in channels {
            w.write_sample(to_i16(c[i])).map_err(|e| map_hound(path, e))?;
        }
    }
    w.finalize().map_err(|e| map_hound(path, e))
}

/// Writes a mono 32-bit float WAV file.
pub fn write_wav_f32(path: &Path, buf: &AudioBuffer) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate_hz(),
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in buf.samples() {
        w.write_sample(s as f32).map_err(|e| map_hound(path, e))?;
    }
    w.finalize().map_err(|e| map_hound(path, e))
}

/// Scales the buffer to `target_rms`. If that would push any sample past
/// 1.0, the gain is reduced so the peak lands at [`PEAK_LIMIT`] instead.
pub fn normalize_rms(buf: &AudioBuffer, target_rms: f64) -> Result<AudioBuffer> {
    let level = buf.rms();
    if level == 0.0 {
        return Err(DspError::SilentClip);
    }
    if !(target_rms.is_finite() && target_rms > 0.0) {
        return Err(DspError::InvalidBuffer(format!("target rms {target_rms} must be > 0")));
    }
    let mut gain = target_rms / level;
    let peak = buf.peak();
    if peak * gain > 1.0 {
        gain = PEAK_LIMIT / peak;
    }
    let samples = buf.samples.iter().map(|s| (s * gain).clamp(-1.0, 1.0)).collect();
    Ok(AudioBuffer::from_parts_unchecked(
        samples,
        buf.sample_rate_hz,
        buf.clip_id.clone(),
    ))
}
