//! Feature tables for a clip manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use voqual_core::ClipRecord;
use voqual_dsp::compare::extract_compare_lite_file;
use voqual_dsp::{load_embedding_table, CompareLiteConfig, FeatureSetId, FeatureVector};

use crate::error::{HarnessError, Result};

pub fn audio_path(root: &Path, clip: &ClipRecord) -> PathBuf {
    let p = Path::new(&clip.audio_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

/// compare-lite vectors for every clip, extracted in parallel. Any clip
/// failure aborts with the clip id attached.
pub fn extract_compare_lite_clips(
    clips: &[ClipRecord],
    audio_root: &Path,
    cfg: &CompareLiteConfig,
) -> Result<BTreeMap<String, FeatureVector>> {
    let rows: Vec<Result<(String, FeatureVector)>> = clips
        .par_iter()
        .map(|c| {
            extract_compare_lite_file(&audio_path(audio_root, c), cfg)
                .map(|fv| (c.clip_id.clone(), fv))
                .map_err(|e| HarnessError::from(e).context(format!("clip {}", c.clip_id)))
        })
        .collect();
    rows.into_iter().collect()
}

/// Feature vectors for `set`: read from `table` when given, otherwise
/// (compare-lite only) extracted from audio.
pub fn feature_table(
    set: FeatureSetId,
    table: Option<&Path>,
    clips: &[ClipRecord],
    audio_root: &Path,
    cfg: &CompareLiteConfig,
) -> Result<BTreeMap<String, FeatureVector>> {
    match (set, table) {
        (_, Some(path)) => Ok(load_embedding_table(path, set)?),
        (FeatureSetId::CompareLite, None) => extract_compare_lite_clips(clips, audio_root, cfg),
        (other, None) => Err(HarnessError::Input(format!(
            "feature set {other} is read from a precomputed table; none given"
        ))),
    }
}

/// Features CSV text with `clip_id` first, rows in clip id order.
pub fn features_csv(table: &BTreeMap<String, FeatureVector>) -> Result<Vec<u8>> {
    let rows: Vec<(String, FeatureVector)> = table.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let mut buf = Vec::new();
    voqual_dsp::features::write_features_csv(&mut buf, &rows)?;
    Ok(buf)
}
