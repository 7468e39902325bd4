//! Agreement and error metrics.
//!
//! ICC follows the two-way random-effects, absolute-agreement model. With
//! `MSR`, `MSC` and `MSE` the row (subject), column (rater) and residual mean
//! squares of an `n × k` matrix:
//!
//! ```text
//! ICC(2,1) = (MSR − MSE) / (MSR + (k−1)·MSE + k·(MSC − MSE)/n)
//! ICC(2,k) = (MSR − MSE) / (MSR + (MSC − MSE)/n)
//! ```

use crate::error::{Error, Result};

/// Complete `n_subjects × k_raters` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    values: Vec<f64>,
    n: usize,
    k: usize,
    subject_ids: Vec<String>,
    rater_ids: Vec<String>,
}

impl RatingMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        let subject_ids = (0..n).map(|i| format!("s{i}")).collect();
        let rater_ids = (0..k).map(|j| format!("r{j}")).collect();
        Self::with_ids(rows, subject_ids, rater_ids)
    }

    pub fn with_ids(rows: Vec<Vec<f64>>, subject_ids: Vec<String>, rater_ids: Vec<String>) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if n < 2 || k < 2 {
            return Err(Error::InvalidInput(format!(
                "rating matrix needs n >= 2 subjects and k >= 2 raters, got {n} x {k}"
            )));
        }
        if subject_ids.len() != n || rater_ids.len() != k {
            return Err(Error::InvalidInput("rating matrix id lists do not match its shape".into()));
        }
        let mut values = Vec::with_capacity(n * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidInput(format!(
                    "rating matrix row {i} has {} cells, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("rating matrix row {i} has a non-finite cell")));
            }
            values.extend(row);
        }
        Ok(Self {
            values,
            n,
            k,
            subject_ids,
            rater_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn rater_ids(&self) -> &[String] {
        &self.rater_ids
    }
}

/// Two-way ANOVA (without replication) decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaComponents {
    pub msr: f64,
    pub msc: f64,
    pub mse: f64,
    pub ss_rows: f64,
    pub ss_cols: f64,
    pub ss_error: f64,
    pub ss_total: f64,
    pub n: usize,
    pub k: usize,
}

pub fn anova_two_way(m: &RatingMatrix) -> AnovaComponents {
    let (n, k) = (m.n, m.k);
    let (nf, kf) = (n as f64, k as f64);
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).iter().sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| m.get(i, j)).sum::<f64>() / nf)
        .collect();
    let grand = m.values.iter().sum::<f64>() / (nf * kf);

    let ss_rows = kf * row_means.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|c| (c - grand).powi(2)).sum::<f64>();
    let mut ss_error = 0.0;
    let mut ss_total = 0.0;
    for i in 0..n {
        for j in 0..k {
            let x = m.get(i, j);
            ss_error += (x - row_means[i] - col_means[j] + grand).powi(2);
            ss_total += (x - grand).powi(2);
        }
    }
    AnovaComponents {
        msr: ss_rows / (nf - 1.0),
        msc: ss_cols / (kf - 1.0),
        mse: ss_error / ((nf - 1.0) * (kf - 1.0)),
        ss_rows,
        ss_cols,
        ss_error,
        ss_total,
        n,
        k,
    }
}

/// ICC(2,k): reliability of the mean of the k raters.
pub fn icc2k(m: &RatingMatrix) -> Result<f64> {
    icc2k_from(&anova_two_way(m))
}

/// ICC(2,1): reliability of a single rater.
pub fn icc21(m: &RatingMatrix) -> Result<f64> {
    icc21_from(&anova_two_way(m))
}

pub fn icc2k_from(a: &AnovaComponents) -> Result<f64> {
    let denom = a.msr + (a.msc - a.mse) / a.n as f64;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((a.msr - a.mse) / denom)
}

pub fn icc21_from(a: &AnovaComponents) -> Result<f64> {
    let (n, k) = (a.n as f64, a.k as f64);
    let denom = a.msr + (k - 1.0) * a.mse + k * (a.msc - a.mse) / n;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((a.msr - a.mse) / denom)
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "pearson needs at least 2 points, got {}",
            a.len()
        )));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

pub fn rmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch(pred.len(), target.len()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("rmse of empty vectors".into()));
    }
    let ss: f64 = pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((ss / pred.len() as f64).sqrt())
}

pub fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Population standard deviation (divides by n).
pub fn population_std(v: &[f64]) -> Option<f64> {
    let m = mean(v)?;
    Some((v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt())
}
