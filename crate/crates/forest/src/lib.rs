//! Deterministic random-forest regression for PQ targets, with a mean
//! baseline, a ridge reference model and validation-set grid search.

pub mod baseline;
pub mod error;
pub mod forest;
pub mod matrix;
pub mod model;
pub mod params;
pub mod ridge;
pub mod tree;
pub mod tune;

pub use baseline::MeanBaseline;
pub use error::{ForestError, Result};
pub use forest::{bootstrap_indices, Forest};
pub use matrix::Matrix;
pub use model::RandomForestModel;
pub use params::{Hyperparams, Mtry};
pub use ridge::RidgeModel;
pub use tree::{Node, RegressionTree};
pub use tune::{tune, Grid, GridCell, TuneResult};
