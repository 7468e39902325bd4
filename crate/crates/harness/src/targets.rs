//! Regression targets from expert labels.
//!
//! CAPE-V qualities use the mean over every expert and trial. Gendered
//! qualities use the single expert with the widest coverage (ties to the
//! lexicographically first id), averaged over that expert's trials.

use std::collections::BTreeMap;

use voqual_core::labels::rater_coverage;
use voqual_core::{aggregate_ratings, rater_means, PerceptualQuality, RaterClass, RatingRecord};

/// The expert whose labels define a gendered target, if any.
pub fn reference_rater(ratings: &[RatingRecord], pq: PerceptualQuality) -> Option<String> {
    rater_coverage(ratings, RaterClass::Expert, pq)
        .into_iter()
        .max_by(|(ra, na), (rb, nb)| na.cmp(nb).then_with(|| rb.cmp(ra)))
        .map(|(r, _)| r.to_string())
}

pub fn expert_targets(ratings: &[RatingRecord], pq: PerceptualQuality) -> BTreeMap<String, f64> {
    if !pq.gendered() {
        return aggregate_ratings(ratings, RaterClass::Expert, pq);
    }
    let Some(rater) = reference_rater(ratings, pq) else {
        return BTreeMap::new();
    };
    rater_means(ratings, RaterClass::Expert, pq)
        .into_iter()
        .filter_map(|(clip, raters)| raters.get(&rater).map(|v| (clip, *v)))
        .collect()
}
