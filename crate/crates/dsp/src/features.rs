use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DspError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureSetId {
    #[serde(rename = "compare-lite")]
    CompareLite,
    #[serde(rename = "ema")]
    Ema,
    #[serde(rename = "hubert-l7")]
    HubertL7,
}

impl FeatureSetId {
    pub const ALL: [FeatureSetId; 3] = [Self::CompareLite, Self::Ema, Self::HubertL7];

    pub fn name(self) -> &'static str {
        match self {
            Self::CompareLite => "compare-lite",
            Self::Ema => "ema",
            Self::HubertL7 => "hubert-l7",
        }
    }
}

impl fmt::Display for FeatureSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSetId {
    type Err = DspError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s.trim())
            .ok_or_else(|| DspError::UnknownFeatureSet(s.to_string()))
    }
}

/// Named, finite, fixed-length representation of one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    set: FeatureSetId,
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(set: FeatureSetId, names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(DspError::InvalidBuffer(format!(
                "{} names for {} values",
                names.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DspError::InvalidBuffer(format!("non-finite value in `{}`", names[i])));
        }
        Ok(Self { set, names, values })
    }

    pub(crate) fn new_unchecked(set: FeatureSetId, names: Vec<String>, values: Vec<f64>) -> Self {
        debug_assert_eq!(names.len(), values.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { set, names, values }
    }

    pub fn set(&self) -> FeatureSetId {
        self.set
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Writes `clip_id,<names...>` rows. All vectors must share one name list.
pub fn write_features_csv<W: Write>(w: W, rows: &[(String, FeatureVector)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let Some((_, first)) = rows.first() else {
        out.write_record(["clip_id"])?;
        out.flush().map_err(csv::Error::from)?;
        return Ok(());
    };
    let mut header = vec!["clip_id".to_string()];
    header.extend(first.names.iter().cloned());
    out.write_record(&header)?;
    for (clip, fv) in rows {
        if fv.names != first.names {
            return Err(DspError::Table {
                file: "<features>".into(),
                message: format!("clip `{clip}` has a different feature layout"),
            });
        }
        let mut rec = vec![clip.clone()];
        rec.extend(fv.values.iter().map(|v| format_value(*v)));
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Shortest representation that round-trips exactly.
fn format_value(v: f64) -> String {
    let s = format!("{v:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_id_round_trip() {
        for id in FeatureSetId::ALL {
            assert_eq!(id.name().parse::<FeatureSetId>().unwrap(), id);
            let j = serde_json::to_string(&id).unwrap();
            assert_eq!(j, format!("\"{}\"", id.name()));
        }
        assert!(matches!("mfcc".parse::<FeatureSetId>(), Err(DspError::UnknownFeatureSet(_))));
    }

    #[test]
    fn rejects_non_finite_and_mismatch() {
        let n = vec!["a".to_string(), "b".to_string()];
        assert!(FeatureVector::new(FeatureSetId::Ema, n.clone(), vec![1.0]).is_err());
        assert!(FeatureVector::new(FeatureSetId::Ema, n.clone(), vec![1.0, f64::NAN]).is_err());
        let v = FeatureVector::new(FeatureSetId::Ema, n, vec![1.0, 2.5]).unwrap();
        assert_eq!(v.get("b"), Some(2.5));
        assert_eq!(v.get("c"), None);
    }

    #[test]
    fn csv_layout() {
        let names = vec!["x".to_string(), "y".to_string()];
        let rows = vec![
            ("c1".to_string(), FeatureVector::new(FeatureSetId::Ema, names.clone(), vec![1.0, 0.1]).unwrap()),
            ("c2".to_string(), FeatureVector::new(FeatureSetId::Ema, names, vec![-2.0, 1e-300]).unwrap()),
        ];
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "clip_id,x,y\nc1,1,0.1\nc2,-2,1e-300\n");
    }
}
