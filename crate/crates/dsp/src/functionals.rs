//! Twelve summary statistics per descriptor column.
//!
//! Quantiles interpolate linearly between order statistics at position
//! `p · (n − 1)` (the inclusive method). `std` is the population standard
//! deviation, `kurtosis` is excess kurtosis, and both shape moments are 0 for
//! a constant series. `slope` is the least-squares slope against frame index.
//! A column with fewer than two selected frames yields zeros.

use crate::features::{FeatureSetId, FeatureVector};
use crate::lld::LldMatrix;
use crate::spectral::least_squares_slope;

pub const FUNCTIONALS: [&str; 12] = [
    "mean", "std", "min", "max", "range", "median", "q1", "q3", "iqr", "skewness", "kurtosis",
    "slope",
];

pub const IMPUTED_FLAG: &str = "f0__imputed";

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Functionals of `values` observed at frame positions `index`.
pub fn compute(values: &[f64], index: &[f64]) -> [f64; 12] {
    let n = values.len();
    if n < 2 {
        return [0.0; 12];
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let (min, max) = (sorted[0], sorted[n - 1]);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    if max > min {
        for v in &sorted {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
    }
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    let median = quantile_sorted(&sorted, 0.5);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let slope = if max > min {
        least_squares_slope(index, values)
    } else {
        0.0
    };
    [
        mean,
        m2.sqrt(),
        min,
        max,
        max - min,
        median,
        q1,
        q3,
        q3 - q1,
        skew,
        kurt,
        slope,
    ]
}

/// Feature names for a matrix with the given column names.
pub fn feature_names(columns: &[String]) -> Vec<String> {
    let mut names: Vec<String> = columns
        .iter()
        .flat_map(|c| FUNCTIONALS.iter().map(move |f| format!("{c}__{f}")))
        .collect();
    names.push(IMPUTED_FLAG.to_string());
    names
}

/// Summarizes every column over its frame mask into a compare-lite vector.
pub fn apply_functionals(llds: &LldMatrix) -> FeatureVector {
    let mut values = Vec::with_capacity(llds.n_columns() * FUNCTIONALS.len() + 1);
    for i in 0..llds.n_columns() {
        let frames = llds.selected_frames(i);
        let col = llds.column(i);
        let v: Vec<f64> = frames.iter().map(|&t| col[t]).collect();
        let idx: Vec<f64> = frames.iter().map(|&t| t as f64).collect();
        values.extend(compute(&v, &idx));
    }
    values.push(if llds.n_voiced() < 2 { 1.0 } else { 0.0 });
    FeatureVector::new_unchecked(FeatureSetId::CompareLite, feature_names(llds.names()), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lld::FrameMask;
    use proptest::prelude::*;

    fn at(f: &[f64; 12], name: &str) -> f64 {
        f[FUNCTIONALS.iter().position(|n| *n == name).unwrap()]
    }

    fn idx(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn constant_column() {
        let f = compute(&[5.0; 9], &idx(9));
        assert_eq!(at(&f, "mean"), 5.0);
        assert_eq!(at(&f, "std"), 0.0);
        assert_eq!(at(&f, "range"), 0.0);
        assert_eq!(at(&f, "slope"), 0.0);
        assert_eq!(at(&f, "skewness"), 0.0);
        assert_eq!(at(&f, "kurtosis"), 0.0);
    }

    #[test]
    fn ramp_column() {
        let f = compute(&[1.0, 2.0, 3.0, 4.0], &idx(4));
        assert_eq!(at(&f, "slope"), 1.0);
        assert_eq!(at(&f, "median"), 2.5);
        assert_eq!(at(&f, "q1"), 1.75);
        assert_eq!(at(&f, "q3"), 3.25);
        assert_eq!(at(&f, "iqr"), 1.5);
        assert!((at(&f, "std") - 1.25f64.sqrt()).abs() < 1e-15);
        assert!(at(&f, "skewness").abs() < 1e-15);
        // uniform 4-point kurtosis: m4/m2² − 3 = 2.5625/1.5625 − 3
        assert!((at(&f, "kurtosis") - (2.5625 / 1.5625 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn short_columns_are_zero() {
        assert_eq!(compute(&[], &[]), [0.0; 12]);
        assert_eq!(compute(&[3.0], &[0.0]), [0.0; 12]);
    }

    #[test]
    fn unvoiced_matrix_imputes() {
        let n = 6;
        let base = vec![
            ("F0_hz".to_string(), FrameMask::Voiced, vec![0.0; n]),
            ("voicing_flag".to_string(), FrameMask::All, vec![0.0; n]),
            ("rms_energy".to_string(), FrameMask::All, vec![0.2; n]),
        ];
        let m = LldMatrix::from_base(base, vec![false; n], vec![true; n]).unwrap();
        let fv = apply_functionals(&m);
        assert_eq!(fv.len(), 5 * 12 + 1);
        assert_eq!(fv.get(IMPUTED_FLAG), Some(1.0));
        for f in FUNCTIONALS {
            assert_eq!(fv.get(&format!("F0_hz__{f}")), Some(0.0));
        }
        assert!((fv.get("rms_energy__mean").unwrap() - 0.2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn order_statistics(v in proptest::collection::vec(-1e3f64..1e3, 2..60)) {
            let f = compute(&v, &idx(v.len()));
            let (mn, q1, med, q3, mx) =
                (at(&f, "min"), at(&f, "q1"), at(&f, "median"), at(&f, "q3"), at(&f, "max"));
            prop_assert!(mn <= q1 && q1 <= med && med <= q3 && q3 <= mx);
            prop_assert_eq!(at(&f, "range"), mx - mn);
            prop_assert_eq!(at(&f, "iqr"), q3 - q1);
            prop_assert!(f.iter().all(|x| x.is_finite()));
        }
    }
}
