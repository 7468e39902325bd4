//! Bagged ensembles of regression trees.
//!
//! Tree `t` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `t`: first
//! the bootstrap sample (n draws with replacement), then the per-node feature
//! samples. Trees are fitted in parallel and stored by index, so a model is a
//! pure function of `(X, y, params)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ForestError, Result};
use crate::matrix::{check_targets, Matrix};
use crate::params::Hyperparams;
use crate::tree::RegressionTree;

pub const PQ_MIN: f64 = 0.0;
pub const PQ_MAX: f64 = 100.0;

fn tree_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

fn draw_bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Bootstrap rows used by tree `t`.
pub fn bootstrap_indices(seed: u64, t: usize, n: usize) -> Vec<usize> {
    draw_bootstrap(&mut tree_rng(seed, t), n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    params: Hyperparams,
    n_features: usize,
    trees: Vec<RegressionTree>,
}

impl Forest {
    pub fn fit(x: &Matrix, y: &[f64], params: &Hyperparams) -> Result<Self> {
        let n = x.n_rows();
        check_targets(y, n)?;
        params.validate(x.n_cols())?;
        if n < 2 * params.min_samples_leaf {
            return Err(ForestError::TooFewSamples {
                needed: 2 * params.min_samples_leaf,
                got: n,
            });
        }
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(params.seed, t);
                let sample = if params.bootstrap {
                    draw_bootstrap(&mut rng, n)
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit(x, y, &sample, params, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            n_features: x.n_cols(),
            trees,
        })
    }

    pub fn params(&self) -> &Hyperparams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    /// Mean of tree outputs without clamping.
    pub fn predict_raw(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean of tree outputs clamped to the PQ scale.
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_raw(row).clamp(PQ_MIN, PQ_MAX)
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features {
            return Err(ForestError::DimensionMismatch {
                expected: self.n_features,
                got: x.n_cols(),
            });
        }
        Ok(x.rows().map(|r| self.predict(r)).collect())
    }
}
