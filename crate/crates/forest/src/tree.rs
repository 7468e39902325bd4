//! CART regression trees.
//!
//! Nodes live in one preorder array. A sample goes left when
//! `x[feature] <= threshold`. Thresholds are midpoints between consecutive
//! distinct values of the node's samples. The chosen split minimizes the sum
//! of child squared errors; ties keep the lowest feature index, then the
//! lowest threshold. A node becomes a leaf when it reaches `max_depth`, holds
//! fewer than `2 · min_samples_leaf` samples, has identical targets, or no
//! admissible split lowers the squared error.
//!
//! When none of the `mtry` sampled features admits an improving split the
//! remaining features are searched in index order before giving up.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ForestError, Result};
use crate::matrix::Matrix;
use crate::params::Hyperparams;

/// Relative squared-error change below which two splits tie.
const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Split {
    feature: usize,
    threshold: f64,
    sse: f64,
}

struct Builder<'a, R: Rng> {
    x: &'a Matrix,
    y: &'a [f64],
    params: &'a Hyperparams,
    mtry: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
    scratch: Vec<(f64, f64)>,
}

impl<R: Rng> Builder<'_, R> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let value = idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64;
        self.nodes.push(Node::Leaf { value, n: idx.len() });
        self.nodes.len() - 1
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let m = idx.len();
        let first = self.y[idx[0]];
        let constant = idx.iter().all(|&i| self.y[i] == first);
        if constant || depth >= self.params.max_depth || m < 2 * self.params.min_samples_leaf {
            return self.leaf(idx);
        }
        let Some(split) = self.best_split(idx) else {
            return self.leaf(idx);
        };

        let pos = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0, n: 0 });
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        let l = self.build(&mut left, depth + 1);
        let r = self.build(&mut right, depth + 1);
        self.nodes[pos] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        pos
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<Split> {
        let d = self.x.n_cols();
        let m = idx.len() as f64;
        let mean = idx.iter().map(|&i| self.y[i]).sum::<f64>() / m;
        let parent_sse: f64 = idx.iter().map(|&i| (self.y[i] - mean).powi(2)).sum();
        if parent_sse <= 0.0 {
            return None;
        }
        let tol = REL_TOL * parent_sse;

        let mut sampled: Vec<usize> = if self.mtry >= d {
            (0..d).collect()
        } else {
            rand::seq::index::sample(&mut *self.rng, d, self.mtry).into_vec()
        };
        sampled.sort_unstable();

        let search = |b: &mut Self, features: &[usize]| {
            let mut best: Option<Split> = None;
            for &f in features {
                if let Some(s) = b.best_for_feature(idx, f, mean) {
                    if best.is_none_or(|cur| s.sse < cur.sse - tol) {
                        best = Some(s);
                    }
                }
            }
            best.filter(|s| s.sse < parent_sse - tol)
        };

        if let Some(s) = search(self, &sampled) {
            return Some(s);
        }
        if sampled.len() == d {
            return None;
        }
        let rest: Vec<usize> = (0..d).filter(|f| sampled.binary_search(f).is_err()).collect();
        search(self, &rest)
    }

    fn best_for_feature(&mut self, idx: &[usize], f: usize, mean: f64) -> Option<Split> {
        let leaf = self.params.min_samples_leaf;
        let m = idx.len();
        self.scratch.clear();
        self.scratch
            .extend(idx.iter().map(|&i| (self.x.get(i, f), self.y[i] - mean)));
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));

        let tot: f64 = self.scratch.iter().map(|p| p.1).sum();
        let tot_sq: f64 = self.scratch.iter().map(|p| p.1 * p.1).sum();
        let (mut s, mut sq) = (0.0, 0.0);
        let mut best: Option<Split> = None;
        for i in 1..m {
            let (xp, yp) = self.scratch[i - 1];
            s += yp;
            sq += yp * yp;
            let xi = self.scratch[i].0;
            if xp == xi || i < leaf || m - i < leaf {
                continue;
            }
            let nl = i as f64;
            let nr = (m - i) as f64;
            let sse = (sq - s * s / nl).max(0.0) + ((tot_sq - sq) - (tot - s).powi(2) / nr).max(0.0);
            if best.is_none_or(|b| sse < b.sse) {
                let mid = xp + (xi - xp) * 0.5;
                let threshold = if mid < xi { mid } else { xp };
                best = Some(Split {
                    feature: f,
                    threshold,
                    sse,
                });
            }
        }
        best
    }
}

impl RegressionTree {
    /// Fits on the rows listed in `sample` (duplicates allowed).
    pub fn fit<R: Rng>(
        x: &Matrix,
        y: &[f64],
        sample: &[usize],
        params: &Hyperparams,
        rng: &mut R,
    ) -> Result<Self> {
        if sample.is_empty() {
            return Err(ForestError::EmptyInput);
        }
        params.validate(x.n_cols())?;
        let mut b = Builder {
            x,
            y,
            params,
            mtry: params.mtry.resolve(x.n_cols()),
            rng,
            nodes: Vec::new(),
            scratch: Vec::with_capacity(sample.len()),
        };
        let mut idx = sample.to_vec();
        b.build(&mut idx, 0);
        Ok(Self { nodes: b.nodes })
    }

    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], k: usize) -> usize {
            match nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Mtry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(depth: usize, leaf: usize) -> Hyperparams {
        Hyperparams {
            n_trees: 1,
            max_depth: depth,
            min_samples_leaf: leaf,
            mtry: Mtry::All,
            seed: 0,
            bootstrap: false,
        }
    }

    fn fit(rows: &[Vec<f64>], y: &[f64], p: Hyperparams) -> RegressionTree {
        let x = Matrix::from_rows(rows).unwrap();
        let idx: Vec<usize> = (0..y.len()).collect();
        RegressionTree::fit(&x, y, &idx, &p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    /// Exhaustive search over every feature and midpoint, scoring SSE directly.
    fn oracle_split(rows: &[Vec<f64>], y: &[f64], leaf: usize) -> Option<(usize, f64, f64)> {
        let sse = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m).powi(2)).sum::<f64>()
        };
        let mut best: Option<(usize, f64, f64)> = None;
        for f in 0..rows[0].len() {
            let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let l: Vec<f64> = (0..y.len()).filter(|&i| rows[i][f] <= t).map(|i| y[i]).collect();
                let r: Vec<f64> = (0..y.len()).filter(|&i| rows[i][f] > t).map(|i| y[i]).collect();
                if l.len() < leaf || r.len() < leaf {
                    continue;
                }
                let s = sse(&l) + sse(&r);
                if best.is_none_or(|b| s < b.2 - 1e-9) {
                    best = Some((f, t, s));
                }
            }
        }
        best
    }

    #[test]
    fn step_function() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let y = [0.0, 0.0, 10.0, 10.0];
        let t = fit(&rows, &y, params(1, 1));
        assert_eq!(oracle_split(&rows, &y, 1).map(|b| (b.0, b.1)), Some((0, 1.5)));
        match t.nodes()[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((feature, threshold), (0, 1.5)),
            _ => panic!("expected a split"),
        }
        assert_eq!(t.predict(&[2.7]), 10.0);
        assert_eq!(t.predict(&[0.2]), 0.0);
        let mut leaves: Vec<f64> = t
            .nodes()
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { value, .. } => Some(*value),
                _ => None,
            })
            .collect();
        leaves.sort_by(f64::total_cmp);
        assert_eq!(leaves, vec![0.0, 10.0]);
    }

    #[test]
    fn root_matches_oracle_on_irregular_data() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let a = ((i * 37) % 17) as f64;
                let b = ((i * 11) % 7) as f64 * 0.5;
                vec![a, b, (i % 3) as f64]
            })
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 0.3 + if r[1] > 1.2 { 5.0 } else { 0.0 }).collect();
        for leaf in [1, 3, 8] {
            let t = fit(&rows, &y, params(1, leaf));
            let (f, thr, _) = oracle_split(&rows, &y, leaf).unwrap();
            match t.nodes()[0] {
                Node::Split { feature, threshold, .. } => {
                    assert_eq!(feature, f);
                    assert!((threshold - thr).abs() < 1e-12);
                }
                _ => panic!("expected a split"),
            }
        }
    }

    #[test]
    fn constant_target_is_one_leaf() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 1.0]).collect();
        let t = fit(&rows, &[7.0; 5], params(10, 1));
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict(&[3.0, 1.0]), 7.0);
    }

    #[test]
    fn identical_rows_cannot_split() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        let t = fit(&rows, &[3.0, 5.0], params(10, 1));
        assert_eq!(t.nodes(), &[Node::Leaf { value: 4.0, n: 2 }]);
    }

    #[test]
    fn tie_prefers_lower_feature() {
        // both features separate y perfectly
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let t = fit(&rows, &[0.0, 1.0], params(1, 1));
        match t.nodes()[0] {
            Node::Split { feature, .. } => assert_eq!(feature, 0),
            _ => panic!(),
        }
    }

    #[test]
    fn respects_depth_and_leaf_size() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..64).map(|i| (i * i) as f64).collect();
        let t = fit(&rows, &y, params(3, 1));
        assert!(t.depth() <= 3);
        let t = fit(&rows, &y, params(usize::MAX, 5));
        for n in t.nodes() {
            if let Node::Leaf { n, .. } = n {
                assert!(*n >= 5);
            }
        }
    }

    #[test]
    fn memorizes_distinct_rows() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![((i * 7) % 40) as f64, (i % 5) as f64]).collect();
        let y: Vec<f64> = (0..40).map(|i| ((i * 13) % 23) as f64).collect();
        let t = fit(&rows, &y, params(usize::MAX, 1));
        for (r, v) in rows.iter().zip(&y) {
            assert_eq!(t.predict(r), *v);
        }
    }
}
