//! Precomputed embedding tables.
//!
//! A header starting `clip_id,frame_index,` marks a frame-level table: the
//! frames of each clip are ordered by `frame_index` and pooled into
//! `<col>__mean` for every column followed by `<col>__std` (population std).
//! Any other header starting with `clip_id` is a pooled table, one row per
//! clip, used as is.
//!
//! EMA tables carry 12 channels per frame (24 once pooled); the other sets
//! take their dimension from the header.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{DspError, Result};
use crate::features::{FeatureSetId, FeatureVector};

pub const EMA_CHANNELS: usize = 12;

fn table_err(file: &str, message: impl Into<String>) -> DspError {
    DspError::Table {
        file: file.to_string(),
        message: message.into(),
    }
}

pub fn load_embedding_table(
    path: &Path,
    expected_set: FeatureSetId,
) -> Result<BTreeMap<String, FeatureVector>> {
    let file = std::fs::File::open(path).map_err(|source| DspError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_embedding_table(file, &path.display().to_string(), expected_set)
}

pub fn read_embedding_table<R: std::io::Read>(
    reader: R,
    file: &str,
    expected_set: FeatureSetId,
) -> Result<BTreeMap<String, FeatureVector>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("clip_id") {
        return Err(table_err(file, "first column must be `clip_id`"));
    }
    let framed = header.get(1).map(String::as_str) == Some("frame_index");
    let skip = if framed { 2 } else { 1 };
    let cols: Vec<String> = header[skip..].to_vec();
    if cols.is_empty() {
        return Err(table_err(file, "no value columns"));
    }
    if expected_set == FeatureSetId::Ema {
        let want = if framed { EMA_CHANNELS } else { 2 * EMA_CHANNELS };
        if cols.len() != want {
            return Err(table_err(
                file,
                format!("ema table needs {want} value columns, header has {}", cols.len()),
            ));
        }
    }

    let mut frames: BTreeMap<String, Vec<(u64, Vec<f64>)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(DspError::DimensionMismatch {
                file: file.to_string(),
                row,
                expected: cols.len(),
                got: rec.len().saturating_sub(skip),
            });
        }
        let clip = rec[0].to_string();
        if clip.is_empty() {
            return Err(table_err(file, format!("row {row}: empty clip_id")));
        }
        let frame = if framed {
            rec[1]
                .parse::<u64>()
                .map_err(|_| table_err(file, format!("row {row}: bad frame_index `{}`", &rec[1])))?
        } else {
            0
        };
        let mut values = Vec::with_capacity(cols.len());
        for (j, field) in rec.iter().skip(skip).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                table_err(file, format!("row {row}: column `{}`: not a number", cols[j]))
            })?;
            if !v.is_finite() {
                return Err(DspError::NonFinite {
                    file: file.to_string(),
                    row,
                    column: cols[j].clone(),
                });
            }
            values.push(v);
        }
        let entry = frames.entry(clip.clone()).or_default();
        if !framed && !entry.is_empty() {
            return Err(table_err(file, format!("row {row}: duplicate clip `{clip}`")));
        }
        if framed && entry.iter().any(|(f, _)| *f == frame) {
            return Err(table_err(
                file,
                format!("row {row}: duplicate frame {frame} for clip `{clip}`"),
            ));
        }
        entry.push((frame, values));
    }

    let names: Vec<String> = if framed {
        cols.iter()
            .map(|c| format!("{c}__mean"))
            .chain(cols.iter().map(|c| format!("{c}__std")))
            .collect()
    } else {
        cols.clone()
    };
    let mut out = BTreeMap::new();
    for (clip, mut rows) in frames {
        let values = if framed {
            rows.sort_by_key(|(f, _)| *f);
            pool_mean_std(rows.iter().map(|(_, v)| v.as_slice()), cols.len())
        } else {
            rows.pop().map(|(_, v)| v).unwrap_or_default()
        };
        out.insert(clip, FeatureVector::new(expected_set, names.clone(), values)?);
    }
    Ok(out)
}

/// Mean of every column followed by its population std.
pub fn pool_mean_std<'a>(frames: impl Iterator<Item = &'a [f64]> + Clone, dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    let mut n = 0usize;
    for f in frames.clone() {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v;
        }
        n += 1;
    }
    let nf = n.max(1) as f64;
    for m in &mut mean {
        *m /= nf;
    }
    let mut var = vec![0.0; dim];
    for f in frames {
        for ((s, v), m) in var.iter_mut().zip(f).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    mean.extend(var.iter().map(|s| (s / nf).sqrt()));
    mean
}
