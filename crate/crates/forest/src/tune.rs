//! Exhaustive grid search on a validation split.
//!
//! The best cell has the lowest validation RMSE of clamped predictions.
//! Exact ties go to fewer trees, then shallower depth, then larger leaves,
//! then fewer sampled features. A cell whose fit fails is logged and skipped.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::error::{ForestError, Result};
use crate::forest::Forest;
use crate::matrix::{check_targets, Matrix};
use crate::params::{Hyperparams, Mtry};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub mtry: Vec<Mtry>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            n_trees: vec![100, 300],
            max_depth: vec![10, 20],
            min_samples_leaf: vec![1, 2, 5],
            mtry: vec![Mtry::Sqrt, Mtry::Third],
        }
    }
}

impl Grid {
    pub fn single(p: &Hyperparams) -> Self {
        Self {
            n_trees: vec![p.n_trees],
            max_depth: vec![p.max_depth],
            min_samples_leaf: vec![p.min_samples_leaf],
            mtry: vec![p.mtry],
        }
    }

    pub fn len(&self) -> usize {
        self.n_trees.len() * self.max_depth.len() * self.min_samples_leaf.len() * self.mtry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self, seed: u64) -> Vec<Hyperparams> {
        let mut out = Vec::with_capacity(self.len());
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &min_samples_leaf in &self.min_samples_leaf {
                    for &mtry in &self.mtry {
                        out.push(Hyperparams {
                            n_trees,
                            max_depth,
                            min_samples_leaf,
                            mtry,
                            seed,
                            bootstrap: true,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub params: Hyperparams,
    pub val_rmse: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: Hyperparams,
    pub val_rmse: f64,
    pub cells: Vec<GridCell>,
}

fn parsimony(p: &Hyperparams, d: usize) -> (usize, usize, Reverse<usize>, usize) {
    (p.n_trees, p.max_depth, Reverse(p.min_samples_leaf), p.mtry.resolve(d))
}

pub fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    (pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64).sqrt()
}

pub fn tune(
    x_train: &Matrix,
    y_train: &[f64],
    x_val: &Matrix,
    y_val: &[f64],
    grid: &Grid,
    seed: u64,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(ForestError::EmptyGrid);
    }
    check_targets(y_val, x_val.n_rows())?;
    if x_val.n_cols() != x_train.n_cols() {
        return Err(ForestError::DimensionMismatch {
            expected: x_train.n_cols(),
            got: x_val.n_cols(),
        });
    }
    let d = x_train.n_cols();
    let mut cells = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, Hyperparams)> = None;
    for p in grid.points(seed) {
        match Forest::fit(x_train, y_train, &p).and_then(|f| f.predict_matrix(x_val)) {
            Ok(pred) => {
                let r = rmse(&pred, y_val);
                let better = match &best {
                    None => true,
                    Some((br, bp)) => r < *br || (r == *br && parsimony(&p, d) < parsimony(bp, d)),
                };
                if better {
                    best = Some((r, p));
                }
                cells.push(GridCell { params: p, val_rmse: Some(r), error: None });
            }
            Err(e) => {
                log::warn!("grid cell {p:?} failed: {e}");
                cells.push(GridCell { params: p, val_rmse: None, error: Some(e.to_string()) });
            }
        }
    }
    match best {
        Some((val_rmse, best)) => Ok(TuneResult { best, val_rmse, cells }),
        None => Err(ForestError::AllGridPointsFailed(
            cells.last().and_then(|c| c.error.clone()).unwrap_or_default(),
        )),
    }
}
