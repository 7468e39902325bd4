use serde::{Deserialize, Serialize};

use crate::error::{ForestError, Result};

/// Features sampled at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mtry {
    /// round(√d)
    Sqrt,
    /// round(d / 3)
    Third,
    All,
    Fixed(usize),
}

impl Mtry {
    /// Resolved count, clamped into `1..=d`.
    pub fn resolve(self, d: usize) -> usize {
        let m = match self {
            Mtry::Sqrt => (d as f64).sqrt().round() as usize,
            Mtry::Third => (d as f64 / 3.0).round() as usize,
            Mtry::All => d,
            Mtry::Fixed(m) => m,
        };
        m.clamp(1, d.max(1))
    }
}

impl std::fmt::Display for Mtry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mtry::Sqrt => f.write_str("sqrt"),
            Mtry::Third => f.write_str("third"),
            Mtry::All => f.write_str("all"),
            Mtry::Fixed(m) => write!(f, "{m}"),
        }
    }
}

impl std::str::FromStr for Mtry {
    type Err = ForestError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sqrt" => Ok(Mtry::Sqrt),
            "third" => Ok(Mtry::Third),
            "all" => Ok(Mtry::All),
            other => other
                .parse::<usize>()
                .ok()
                .filter(|m| *m >= 1)
                .map(Mtry::Fixed)
                .ok_or_else(|| ForestError::InvalidParams(format!("mtry `{other}`"))),
        }
    }
}

/// `max_depth = usize::MAX` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub mtry: Mtry,
    pub seed: u64,
    /// Bootstrap resampling per tree; off fits every tree on the full set.
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

fn default_true() -> bool {
    true
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            n_trees: 300,
            max_depth: 20,
            min_samples_leaf: 2,
            mtry: Mtry::Sqrt,
            seed: 0,
            bootstrap: true,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(ForestError::InvalidParams("n_trees must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(ForestError::InvalidParams("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(ForestError::InvalidParams("min_samples_leaf must be >= 1".into()));
        }
        if let Mtry::Fixed(m) = self.mtry {
            if m == 0 || m > d {
                return Err(ForestError::InvalidParams(format!("mtry {m} outside 1..={d}")));
            }
        }
        Ok(())
    }
}
