use serde::{Deserialize, Serialize};

use crate::error::{ForestError, Result};

/// Predicts the training mean everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanBaseline {
    pub mean: f64,
}

impl MeanBaseline {
    pub fn fit(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(ForestError::EmptyInput);
        }
        Ok(Self {
            mean: y.iter().sum::<f64>() / y.len() as f64,
        })
    }

    pub fn predict(&self) -> f64 {
        self.mean
    }
}
