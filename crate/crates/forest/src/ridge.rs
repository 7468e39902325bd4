//! Ridge regression on standardized features.
//!
//! Columns are centered and divided by their population std (constant
//! columns are left at zero). The coefficients solve
//! `(ZᵀZ + λI) β = Zᵀ(y − ȳ)`; the intercept is `ȳ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ForestError, Result};
use crate::forest::{PQ_MAX, PQ_MIN};
use crate::matrix::{check_targets, Matrix};

/// Condition threshold for declaring the unpenalized system singular.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub l2_weight: f64,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Coefficients on the standardized scale.
    pub beta: Vec<f64>,
    pub intercept: f64,
}

fn standardize(x: &Matrix) -> (Vec<f64>, Vec<f64>, DMatrix<f64>) {
    let (n, d) = (x.n_rows(), x.n_cols());
    let nf = n as f64;
    let means: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / nf).collect();
    let scales: Vec<f64> = (0..d)
        .map(|j| ((0..n).map(|i| (x.get(i, j) - means[j]).powi(2)).sum::<f64>() / nf).sqrt())
        .collect();
    let z = DMatrix::from_fn(n, d, |i, j| {
        if scales[j] > 0.0 {
            (x.get(i, j) - means[j]) / scales[j]
        } else {
            0.0
        }
    });
    (means, scales, z)
}

impl RidgeModel {
    pub fn fit(x: &Matrix, y: &[f64], l2_weight: f64) -> Result<Self> {
        check_targets(y, x.n_rows())?;
        if !(l2_weight >= 0.0 && l2_weight.is_finite()) {
            return Err(ForestError::InvalidParams(format!("l2_weight {l2_weight}")));
        }
        let (means, scales, z) = standardize(x);
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        let yc = DVector::from_iterator(y.len(), y.iter().map(|v| v - ybar));
        let d = x.n_cols();
        let a = z.transpose() * &z + DMatrix::identity(d, d) * l2_weight;
        let b = z.transpose() * yc;

        if l2_weight == 0.0 {
            let sv = a.clone().singular_values();
            let max = sv.max();
            if max <= 0.0 || sv.min() <= RANK_TOL * max {
                return Err(ForestError::SingularSystem);
            }
        }
        let beta = a.cholesky().ok_or(ForestError::SingularSystem)?.solve(&b);
        Ok(Self {
            l2_weight,
            means,
            scales,
            beta: beta.iter().copied().collect(),
            intercept: ybar,
        })
    }

    pub fn predict_raw(&self, row: &[f64]) -> f64 {
        let mut acc = self.intercept;
        for j in 0..self.beta.len() {
            if self.scales[j] > 0.0 {
                acc += self.beta[j] * (row[j] - self.means[j]) / self.scales[j];
            }
        }
        acc
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_raw(row).clamp(PQ_MIN, PQ_MAX)
    }

    /// Coefficients in the original feature units.
    pub fn coefficients(&self) -> Vec<f64> {
        self.beta
            .iter()
            .zip(&self.scales)
            .map(|(b, s)| if *s > 0.0 { b / s } else { 0.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Gaussian elimination with partial pivoting on the normal equations.
    fn oracle(z: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
        let d = z[0].len();
        let mut a = vec![vec![0.0; d + 1]; d];
        for r in 0..d {
            for c in 0..d {
                a[r][c] = z.iter().map(|row| row[r] * row[c]).sum::<f64>() + if r == c { lambda } else { 0.0 };
            }
            a[r][d] = z.iter().zip(y).map(|(row, v)| row[r] * v).sum();
        }
        for col in 0..d {
            let p = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, p);
            for r in col + 1..d {
                let f = a[r][col] / a[col][col];
                for c in col..=d {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        let mut x = vec![0.0; d];
        for r in (0..d).rev() {
            let s: f64 = (r + 1..d).map(|c| a[r][c] * x[c]).sum();
            x[r] = (a[r][d] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..10).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| 50.0 + r[0] * 4.0 - r[3] + rng.random_range(-1.0..1.0)).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        for lambda in [0.0, 0.5, 10.0] {
            let m = RidgeModel::fit(&x, &y, lambda).unwrap();
            let (_, _, z) = standardize(&x);
            let zr: Vec<Vec<f64>> = (0..50).map(|i| (0..10).map(|j| z[(i, j)]).collect()).collect();
            let ybar = y.iter().sum::<f64>() / 50.0;
            let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
            let want = oracle(&zr, &yc, lambda);
            for (a, b) in m.beta.iter().zip(&want) {
                assert!((a - b).abs() < 1e-8, "λ={lambda}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_linear_recovers_slope() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0]).collect();
        let m = RidgeModel::fit(&Matrix::from_rows(&rows).unwrap(), &y, 1e-9).unwrap();
        let c = m.coefficients();
        assert!((c[0] - 2.0).abs() < 1e-6, "{c:?}");
        assert!(c[1].abs() < 1e-6);
    }

    #[test]
    fn heavy_penalty_gives_mean() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| 30.0 + i as f64).collect();
        let m = RidgeModel::fit(&Matrix::from_rows(&rows).unwrap(), &y, 1e12).unwrap();
        assert!((m.predict(&[0.0]) - 39.5).abs() < 1e-6);
        assert!((m.predict(&[19.0]) - 39.5).abs() < 1e-6);
    }

    #[test]
    fn singular_without_penalty() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let e = RidgeModel::fit(&x, &y, 0.0).unwrap_err();
        assert!(matches!(e, ForestError::SingularSystem));
        assert!(e.to_string().contains("l2_weight > 0"));
        assert!(RidgeModel::fit(&x, &y, 0.1).is_ok());
    }

    #[test]
    fn predictions_clamped() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 20.0 * i as f64).collect();
        let m = RidgeModel::fit(&Matrix::from_rows(&rows).unwrap(), &y, 0.0).unwrap();
        assert_eq!(m.predict(&[9.0]), 100.0);
        assert!(m.predict_raw(&[9.0]) > 100.0);
    }
}
