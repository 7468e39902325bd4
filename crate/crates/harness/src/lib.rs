//! Experiment orchestration for perceptual voice quality prediction:
//! labels and features in, tuned forests and report files out.
//!
//! [`experiment::run_experiment`] is the library entry point; the `voqual`
//! binary wraps it and the individual stages in subcommands ([`cli`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod extract;
pub mod output;
pub mod scatter;
pub mod synth;
pub mod targets;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{run_and_write, run_experiment, ExperimentRun, ResultRow, ResultTable};
pub use scatter::{report_scatter, ScatterReport};
