//! Experiment runner, acceptance suites and plotting for the SGDF optimizer suite.

pub mod config;
pub mod error;
pub mod plot;
pub mod runner;
pub mod suites;
pub mod trace;

pub use config::{ExperimentConfig, ExperimentKind, ObjectiveSpec, CONFIG_VERSION};
pub use error::{CliError, Result};
pub use runner::{run_experiment, ExperimentOutcome, ExperimentSummary, RunOptions};
pub use suites::{run_suite, Verdict, SUITES};
