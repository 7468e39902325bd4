//! A fitted forest bound to one feature set and one target quality, with a
//! versioned JSON file format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use voqual_core::PerceptualQuality;
use voqual_dsp::{FeatureSetId, FeatureVector};

use crate::error::{ForestError, Result};
use crate::forest::Forest;
use crate::matrix::Matrix;
use crate::params::Hyperparams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub format_version: u32,
    pub feature_set: FeatureSetId,
    pub target_pq: PerceptualQuality,
    pub feature_names: Vec<String>,
    pub forest: Forest,
}

impl RandomForestModel {
    pub fn fit(
        x: &Matrix,
        y: &[f64],
        params: &Hyperparams,
        feature_set: FeatureSetId,
        target_pq: PerceptualQuality,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if feature_names.len() != x.n_cols() {
            return Err(ForestError::DimensionMismatch {
                expected: x.n_cols(),
                got: feature_names.len(),
            });
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            feature_set,
            target_pq,
            feature_names,
            forest: Forest::fit(x, y, params)?,
        })
    }

    pub fn params(&self) -> &Hyperparams {
        self.forest.params()
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_names.len() {
            return Err(ForestError::DimensionMismatch {
                expected: self.feature_names.len(),
                got: row.len(),
            });
        }
        Ok(self.forest.predict(row))
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        if x.set() != self.feature_set {
            return Err(ForestError::FeatureSetMismatch {
                expected: self.feature_set.to_string(),
                got: x.set().to_string(),
            });
        }
        if x.len() != self.feature_names.len() {
            return Err(ForestError::DimensionMismatch {
                expected: self.feature_names.len(),
                got: x.len(),
            });
        }
        if let Some(i) = x.names().iter().zip(&self.feature_names).position(|(a, b)| a != b) {
            return Err(ForestError::FeatureNameMismatch(i));
        }
        Ok(self.forest.predict(x.values()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            format_version: u32,
        }
        let probe: Probe = serde_json::from_str(s)?;
        if probe.format_version != FORMAT_VERSION {
            return Err(ForestError::UnsupportedVersion(probe.format_version));
        }
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|source| ForestError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|source| ForestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&s)
    }
}
