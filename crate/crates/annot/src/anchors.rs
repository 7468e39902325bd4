//! Operator-supplied anchor examples: one low and one high example per
//! quality, read from a CSV with header `pq,pole,clip_id,caption,audio_path`.
//!
//! `audio_path` is resolved against the anchor file's directory; an empty
//! path falls back to the clip manifest entry for `clip_id`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use voqual_core::PerceptualQuality;

use crate::error::{AnnotError, Result};

pub const ANCHORS_HEADER: [&str; 5] = ["pq", "pole", "clip_id", "caption", "audio_path"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    Low,
    High,
}

impl Pole {
    pub fn as_str(self) -> &'static str {
        match self {
            Pole::Low => "low",
            Pole::High => "high",
        }
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pole {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(Pole::Low),
            "high" => Ok(Pole::High),
            other => Err(format!("pole must be `low` or `high`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorExample {
    pub pq: PerceptualQuality,
    pub pole: Pole,
    pub clip_id: String,
    pub caption: String,
    #[serde(skip)]
    pub audio_path: Option<PathBuf>,
}

/// Reads and validates an anchor file: 14 rows, one per (quality, pole),
/// each with a non-empty caption.
pub fn read_anchors(path: &Path) -> Result<Vec<AnchorExample>> {
    let file = std::fs::File::open(path).map_err(|e| AnnotError::io(path, e))?;
    let name = path.display().to_string();
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let bad = |line: usize, message: String| AnnotError::Anchors {
        file: name.clone(),
        line,
        message,
    };
    let header = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ANCHORS_HEADER {
        return Err(bad(1, format!("expected header `{}`", ANCHORS_HEADER.join(","))));
    }
    let mut anchors = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| bad(line, e.to_string()))?;
        let pq = PerceptualQuality::from_str(&row[0]).map_err(|e| bad(line, e.to_string()))?;
        let pole = Pole::from_str(&row[1]).map_err(|e| bad(line, e))?;
        if row[2].is_empty() {
            return Err(bad(line, "empty clip_id".into()));
        }
        if row[3].is_empty() {
            return Err(bad(line, "empty caption".into()));
        }
        let audio_path = (!row[4].is_empty()).then(|| base.join(&row[4]));
        anchors.push(AnchorExample {
            pq,
            pole,
            clip_id: row[2].to_string(),
            caption: row[3].to_string(),
            audio_path,
        });
    }
    validate_anchor_set(&anchors)?;
    anchors.sort_by_key(|a| (a.pq, a.pole));
    Ok(anchors)
}

pub fn validate_anchor_set(anchors: &[AnchorExample]) -> Result<()> {
    let keys: BTreeSet<(PerceptualQuality, Pole)> = anchors.iter().map(|a| (a.pq, a.pole)).collect();
    if keys.len() != anchors.len() {
        return Err(AnnotError::AnchorSet("duplicate (pq, pole) entry".into()));
    }
    for pq in PerceptualQuality::ALL {
        for pole in [Pole::Low, Pole::High] {
            if !keys.contains(&(pq, pole)) {
                return Err(AnnotError::AnchorSet(format!("missing {pole} anchor for {pq}")));
            }
        }
    }
    Ok(())
}

/// Anchor set for serving: a missing file is a warning and yields no anchors;
/// a present but invalid file is an error.
pub fn load_anchors_or_warn(path: Option<&Path>) -> Result<Vec<AnchorExample>> {
    match path {
        Some(p) if p.exists() => read_anchors(p),
        Some(p) => {
            log::warn!("anchor file {} not found; serving without anchors", p.display());
            Ok(Vec::new())
        }
        None => {
            log::warn!("no anchor file configured; serving without anchors");
            Ok(Vec::new())
        }
    }
}
