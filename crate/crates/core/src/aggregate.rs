//! Per-clip rating means and inter-rater spread.
//!
//! Sums are taken over values sorted ascending so results do not depend on
//! the order ratings appear in the input.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::labels::{RaterClass, RatingRecord};
use crate::pq::PerceptualQuality;

fn sorted_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean rating of `pq` per clip over every (rater, trial) value from `class`.
/// Clips without such a rating are absent.
pub fn aggregate_ratings(
    ratings: &[RatingRecord],
    class: RaterClass,
    pq: PerceptualQuality,
) -> BTreeMap<String, f64> {
    let mut per_clip: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in ratings {
        if r.rater_class != class {
            continue;
        }
        if let Some(v) = r.values.get(pq) {
            per_clip.entry(r.clip_id.clone()).or_default().push(v);
        }
    }
    per_clip
        .into_iter()
        .map(|(clip, mut vs)| (clip, sorted_mean(&mut vs)))
        .collect()
}

/// clip id → rater id → mean over that rater's trials.
pub fn rater_means(
    ratings: &[RatingRecord],
    class: RaterClass,
    pq: PerceptualQuality,
) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut acc: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for r in ratings {
        if r.rater_class != class {
            continue;
        }
        if let Some(v) = r.values.get(pq) {
            acc.entry(r.clip_id.clone())
                .or_default()
                .entry(r.rater_id.clone())
                .or_default()
                .push(v);
        }
    }
    acc.into_iter()
        .map(|(clip, raters)| {
            let means = raters
                .into_iter()
                .map(|(rater, mut vs)| (rater, sorted_mean(&mut vs)))
                .collect();
            (clip, means)
        })
        .collect()
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Sample standard deviations across rater means, one per eligible clip.
fn clip_stds(ratings: &[RatingRecord], class: RaterClass, pq: PerceptualQuality) -> Vec<f64> {
    rater_means(ratings, class, pq)
        .into_values()
        .filter(|m| m.len() >= 2)
        .map(|m| sample_std(&m.into_values().collect::<Vec<_>>()))
        .collect()
}

/// Average inter-rater standard deviation over all (clip, quality) pairs that
/// have at least two raters. Each rater contributes the mean of their trials.
pub fn per_clip_rater_std(ratings: &[RatingRecord], class: RaterClass) -> Result<f64> {
    let stds: Vec<f64> = PerceptualQuality::ALL
        .into_iter()
        .flat_map(|q| clip_stds(ratings, class, q))
        .collect();
    if stds.is_empty() {
        return Err(Error::InsufficientRaters);
    }
    Ok(stds.iter().sum::<f64>() / stds.len() as f64)
}

/// [`per_clip_rater_std`] restricted to one quality.
pub fn per_clip_rater_std_for(
    ratings: &[RatingRecord],
    class: RaterClass,
    pq: PerceptualQuality,
) -> Result<f64> {
    let stds = clip_stds(ratings, class, pq);
    if stds.is_empty() {
        return Err(Error::InsufficientRaters);
    }
    Ok(stds.iter().sum::<f64>() / stds.len() as f64)
}
