//! Expert vs non-expert clip means for one quality, as plot-ready CSV.

use std::fmt::Write as _;

use serde::Serialize;
use voqual_core::{aggregate_ratings, stats, PerceptualQuality, RaterClass, RatingRecord};

use crate::error::{HarnessError, Result};
use crate::targets::expert_targets;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub clip_id: String,
    pub expert_mean: f64,
    pub nonexpert_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterReport {
    pub pq: PerceptualQuality,
    pub points: Vec<ScatterPoint>,
    /// `None` when fewer than two points or either axis is constant.
    pub pearson_r: Option<f64>,
    pub rmse: f64,
    /// Mean of non-expert minus expert.
    pub mean_offset: f64,
}

/// Clips with both an expert target and at least one non-expert rating.
pub fn report_scatter(ratings: &[RatingRecord], pq: PerceptualQuality) -> Result<ScatterReport> {
    let expert = expert_targets(ratings, pq);
    let points: Vec<ScatterPoint> = aggregate_ratings(ratings, RaterClass::NonExpert, pq)
        .into_iter()
        .filter_map(|(clip_id, ne)| {
            expert.get(&clip_id).map(|ex| ScatterPoint {
                clip_id,
                expert_mean: *ex,
                nonexpert_mean: ne,
            })
        })
        .collect();
    if points.is_empty() {
        return Err(HarnessError::Input(format!(
            "no clips with both expert and non-expert {pq} ratings"
        )));
    }
    let ex: Vec<f64> = points.iter().map(|p| p.expert_mean).collect();
    let ne: Vec<f64> = points.iter().map(|p| p.nonexpert_mean).collect();
    let offsets: Vec<f64> = ne.iter().zip(&ex).map(|(n, e)| n - e).collect();
    Ok(ScatterReport {
        pq,
        pearson_r: stats::pearson(&ex, &ne).ok(),
        rmse: stats::rmse(&ne, &ex)?,
        mean_offset: stats::mean(&offsets).unwrap_or(0.0),
        points,
    })
}

impl ScatterReport {
    /// `clip_id,expert_mean,nonexpert_mean` rows, then `#` footer lines with
    /// n, Pearson r (`undefined` when it does not exist), RMSE and offset.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("clip_id,expert_mean,nonexpert_mean\n");
        for p in &self.points {
            writeln!(s, "{},{},{}", p.clip_id, p.expert_mean, p.nonexpert_mean).unwrap();
        }
        writeln!(s, "# pq={}", self.pq).unwrap();
        writeln!(s, "# n={}", self.points.len()).unwrap();
        match self.pearson_r {
            Some(r) => writeln!(s, "# pearson_r={r}").unwrap(),
            None => writeln!(s, "# pearson_r=undefined").unwrap(),
        }
        writeln!(s, "# rmse={}", self.rmse).unwrap();
        writeln!(s, "# mean_offset={}", self.mean_offset).unwrap();
        s
    }

    pub fn file_name(&self) -> String {
        format!("scatter_{}.csv", self.pq)
    }
}
