//! The seven perceptual qualities and sparse rating vectors over them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound of the rating scale.
pub const SCALE_MIN: f64 = 0.0;
/// Upper bound of the rating scale.
pub const SCALE_MAX: f64 = 100.0;

/// One perceptual voice quality.
///
/// Five come from the CAPE-V clinical protocol (severity is deliberately not
/// modeled); resonance and weight are the gendered qualities used in voice
/// training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerceptualQuality {
    Resonance,
    Weight,
    Strain,
    Loudness,
    Roughness,
    Breathiness,
    Pitch,
}

impl PerceptualQuality {
    /// All qualities in canonical (column) order.
    pub const ALL: [PerceptualQuality; 7] = [
        PerceptualQuality::Resonance,
        PerceptualQuality::Weight,
        PerceptualQuality::Strain,
        PerceptualQuality::Loudness,
        PerceptualQuality::Roughness,
        PerceptualQuality::Breathiness,
        PerceptualQuality::Pitch,
    ];

    pub const COUNT: usize = 7;

    /// Resonance and weight are gendered; the CAPE-V qualities are not.
    pub fn gendered(self) -> bool {
        matches!(self, PerceptualQuality::Resonance | PerceptualQuality::Weight)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PerceptualQuality::Resonance => "resonance",
            PerceptualQuality::Weight => "weight",
            PerceptualQuality::Strain => "strain",
            PerceptualQuality::Loudness => "loudness",
            PerceptualQuality::Roughness => "roughness",
            PerceptualQuality::Breathiness => "breathiness",
            PerceptualQuality::Pitch => "pitch",
        }
    }

    /// Display label with a leading capital, as used in report headers.
    pub fn title(self) -> &'static str {
        match self {
            PerceptualQuality::Resonance => "Resonance",
            PerceptualQuality::Weight => "Weight",
            PerceptualQuality::Strain => "Strain",
            PerceptualQuality::Loudness => "Loudness",
            PerceptualQuality::Roughness => "Roughness",
            PerceptualQuality::Breathiness => "Breathiness",
            PerceptualQuality::Pitch => "Pitch",
        }
    }

    /// Words describing the low and high ends of the scale.
    pub fn poles(self) -> (&'static str, &'static str) {
        match self {
            PerceptualQuality::Resonance => ("dark", "bright"),
            PerceptualQuality::Weight => ("light", "heavy"),
            PerceptualQuality::Strain => ("no strain", "high strain"),
            PerceptualQuality::Loudness => ("typical loudness", "deviant loudness"),
            PerceptualQuality::Roughness => ("no roughness", "high roughness"),
            PerceptualQuality::Breathiness => ("no breathiness", "high breathiness"),
            PerceptualQuality::Pitch => ("typical pitch", "deviant pitch"),
        }
    }
}

impl fmt::Display for PerceptualQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerceptualQuality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        PerceptualQuality::ALL
            .into_iter()
            .find(|q| q.name() == lower)
            .ok_or_else(|| Error::InvalidInput(format!("unknown perceptual quality `{s}`")))
    }
}

/// A rating over any nonempty subset of the seven qualities.
///
/// Absent qualities are `None`, never zero: a zero rating means "no deviance".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPQVector", into = "RawPQVector")]
pub struct PQVector {
    values: [Option<f64>; 7],
}

impl PQVector {
    pub fn new(values: [Option<f64>; 7]) -> Result<Self> {
        let mut any = false;
        for (q, v) in PerceptualQuality::ALL.iter().zip(values.iter()) {
            if let Some(v) = *v {
                check_range(*q, v)?;
                any = true;
            }
        }
        if !any {
            return Err(Error::EmptyVector);
        }
        Ok(Self { values })
    }

    /// Build from `(quality, value)` pairs; later pairs overwrite earlier ones.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PerceptualQuality, f64)>,
    {
        let mut values = [None; 7];
        for (q, v) in pairs {
            values[q.index()] = Some(v);
        }
        Self::new(values)
    }

    /// A vector with all seven qualities set.
    pub fn full(values: [f64; 7]) -> Result<Self> {
        Self::new(values.map(Some))
    }

    pub fn get(&self, q: PerceptualQuality) -> Option<f64> {
        self.values[q.index()]
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PerceptualQuality, f64)> + '_ {
        PerceptualQuality::ALL
            .into_iter()
            .filter_map(|q| self.get(q).map(|v| (q, v)))
    }

    pub fn as_array(&self) -> &[Option<f64>; 7] {
        &self.values
    }

    /// Adds `c` to every present value, clamping into the scale.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self
                .values
                .map(|v| v.map(|x| (x + c).clamp(SCALE_MIN, SCALE_MAX))),
        }
    }
}

pub(crate) fn check_range(q: PerceptualQuality, v: f64) -> Result<()> {
    if v.is_finite() && (SCALE_MIN..=SCALE_MAX).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            quality: q.name().to_string(),
            value: v,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawPQVector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resonance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loudness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    roughness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    breathiness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pitch: Option<f64>,
}

impl TryFrom<RawPQVector> for PQVector {
    type Error = Error;

    fn try_from(r: RawPQVector) -> Result<Self> {
        PQVector::new([
            r.resonance,
            r.weight,
            r.strain,
            r.loudness,
            r.roughness,
            r.breathiness,
            r.pitch,
        ])
    }
}

impl From<PQVector> for RawPQVector {
    fn from(v: PQVector) -> Self {
        let [resonance, weight, strain, loudness, roughness, breathiness, pitch] = v.values;
        RawPQVector {
            resonance,
            weight,
            strain,
            loudness,
            roughness,
            breathiness,
            pitch,
        }
    }
}
