//! Expert/non-expert agreement report laid out like a rater-class × quality
//! table with a trailing average column.
//!
//! * Expert row: ICC over the clip × rater matrix of rater means (trials
//!   averaged per rater). Clips missing any rater are dropped listwise and
//!   counted.
//! * Non-expert row: Pearson r between per-clip non-expert means and
//!   per-clip expert means, with RMSE alongside.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::aggregate::{aggregate_ratings, per_clip_rater_std, rater_means};
use crate::error::Result;
use crate::labels::{RaterClass, RatingRecord};
use crate::pq::PerceptualQuality;
use crate::stats::{self, RatingMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IccForm {
    #[serde(rename = "ICC(2,k)")]
    Icc2k,
    #[serde(rename = "ICC(2,1)")]
    Icc21,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PqCell {
    pub pq: PerceptualQuality,
    /// Headline statistic: ICC for experts, Pearson r for non-experts.
    pub value: Option<f64>,
    /// Clips that entered the statistic.
    pub n: usize,
    /// Clips with ratings that were excluded (incomplete rater coverage).
    pub dropped: usize,
    /// Raters in the ICC matrix (experts only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raters: Option<usize>,
    /// ICC(2,1) alongside the ICC(2,k) headline (experts only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icc21: Option<f64>,
    /// RMSE of non-expert clip means against expert clip means.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub class: RaterClass,
    pub label: &'static str,
    pub statistic: &'static str,
    pub cells: Vec<PqCell>,
    pub average: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub icc_form: IccForm,
    pub rows: Vec<ClassRow>,
    /// Average per-clip standard deviation among experts.
    pub expert_std: Option<f64>,
    /// RMSE of non-expert vs expert clip means, pooled over all qualities.
    pub nonexpert_rmse_pooled: Option<f64>,
    pub nonexpert_rmse_average: Option<f64>,
}

fn average(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    stats::mean(&present)
}

/// Complete-case clip × rater matrix of rater means for one quality.
/// Returns the matrix (if it has ≥ 2 rows and ≥ 2 raters) and the dropped count.
pub fn expert_matrix(
    ratings: &[RatingRecord],
    class: RaterClass,
    pq: PerceptualQuality,
) -> (Option<RatingMatrix>, usize) {
    let means = rater_means(ratings, class, pq);
    let raters: BTreeSet<&String> = means.values().flat_map(|m| m.keys()).collect();
    let raters: Vec<&String> = raters.into_iter().collect();
    let mut rows = Vec::new();
    let mut ids = Vec::new();
    let mut dropped = 0;
    for (clip, m) in &means {
        if raters.iter().all(|r| m.contains_key(*r)) {
            rows.push(raters.iter().map(|r| m[*r]).collect::<Vec<_>>());
            ids.push(clip.clone());
        } else {
            dropped += 1;
        }
    }
    if rows.len() < 2 || raters.len() < 2 {
        return (None, means.len());
    }
    let rater_ids = raters.into_iter().cloned().collect();
    (RatingMatrix::with_ids(rows, ids, rater_ids).ok(), dropped)
}

fn expert_cell(ratings: &[RatingRecord], pq: PerceptualQuality) -> PqCell {
    let (matrix, dropped) = expert_matrix(ratings, RaterClass::Expert, pq);
    match matrix {
        Some(m) => {
            let a = stats::anova_two_way(&m);
            PqCell {
                pq,
                value: stats::icc2k_from(&a).ok(),
                n: m.n(),
                dropped,
                raters: Some(m.k()),
                icc21: stats::icc21_from(&a).ok(),
                rmse: None,
            }
        }
        None => PqCell {
            pq,
            value: None,
            n: 0,
            dropped,
            raters: None,
            icc21: None,
            rmse: None,
        },
    }
}

/// Paired (clip, non-expert mean, expert mean) over clips rated by both.
pub fn paired_means(
    ratings: &[RatingRecord],
    pq: PerceptualQuality,
) -> Vec<(String, f64, f64)> {
    paired_means_with(ratings, &aggregate_ratings(ratings, RaterClass::Expert, pq), pq)
}

/// Like [`paired_means`] but against a precomputed expert mean map.
pub fn paired_means_with(
    ratings: &[RatingRecord],
    expert: &BTreeMap<String, f64>,
    pq: PerceptualQuality,
) -> Vec<(String, f64, f64)> {
    let non = aggregate_ratings(ratings, RaterClass::NonExpert, pq);
    non.into_iter()
        .filter_map(|(clip, ne)| expert.get(&clip).map(|e| (clip, ne, *e)))
        .collect()
}

/// Pearson r and RMSE of non-expert against expert clip means.
/// r is `None` when fewer than two clips overlap or either side is constant.
pub fn nonexpert_cell(pairs: &[(String, f64, f64)], pq: PerceptualQuality) -> PqCell {
    let ne: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let ex: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    PqCell {
        pq,
        value: stats::pearson(&ne, &ex).ok(),
        n: pairs.len(),
        dropped: 0,
        raters: None,
        icc21: None,
        rmse: stats::rmse(&ne, &ex).ok(),
    }
}

impl AgreementReport {
    /// Builds rows for the requested classes, non-experts first.
    pub fn compute(ratings: &[RatingRecord], classes: &[RaterClass]) -> Self {
        let mut rows = Vec::new();
        let mut pooled_ne = Vec::new();
        let mut pooled_ex = Vec::new();
        let mut ne_rmse = Vec::new();

        if classes.contains(&RaterClass::NonExpert) {
            let cells: Vec<PqCell> = PerceptualQuality::ALL
                .into_iter()
                .map(|pq| {
                    let pairs = paired_means(ratings, pq);
                    pooled_ne.extend(pairs.iter().map(|p| p.1));
                    pooled_ex.extend(pairs.iter().map(|p| p.2));
                    nonexpert_cell(&pairs, pq)
                })
                .collect();
            ne_rmse = cells.iter().map(|c| c.rmse).collect();
            rows.push(ClassRow {
                class: RaterClass::NonExpert,
                label: "Non-Experts",
                statistic: "pearson_r",
                average: average(cells.iter().map(|c| c.value)),
                cells,
            });
        }
        if classes.contains(&RaterClass::Expert) {
            let cells: Vec<PqCell> = PerceptualQuality::ALL
                .into_iter()
                .map(|pq| expert_cell(ratings, pq))
                .collect();
            rows.push(ClassRow {
                class: RaterClass::Expert,
                label: "Experts",
                statistic: "icc(2,k)",
                average: average(cells.iter().map(|c| c.value)),
                cells,
            });
        }

        AgreementReport {
            icc_form: IccForm::Icc2k,
            rows,
            expert_std: per_clip_rater_std(ratings, RaterClass::Expert).ok(),
            nonexpert_rmse_pooled: stats::rmse(&pooled_ne, &pooled_ex).ok(),
            nonexpert_rmse_average: average(ne_rmse.into_iter()),
        }
    }

    pub fn row(&self, class: RaterClass) -> Option<&ClassRow> {
        self.rows.iter().find(|r| r.class == class)
    }

    /// Table-style CSV: one row per rater class, seven quality columns plus
    /// `Average`. Missing statistics are empty cells.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["Rater".to_string()];
        header.extend(PerceptualQuality::ALL.iter().map(|q| q.title().to_string()));
        header.push("Average".into());
        wtr.write_record(&header)?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let mut rec = vec![row.label.to_string()];
            rec.extend(row.cells.iter().map(|c| fmt(c.value)));
            rec.push(fmt(row.average));
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
