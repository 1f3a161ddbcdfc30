//! Config-driven experiment orchestration.
//!
//! A TOML config describes one environment, an expert-set recipe, a list of
//! algorithms and a list of seeds. [`runner::run_experiment`] executes every
//! (algorithm, seed, repetition) job on a bounded worker pool, writes one
//! trace CSV per run plus a summary CSV and a manifest, and never lets one
//! failed run abort the rest. [`sweep::run_sweep`] wraps the same machinery
//! in a hyperparameter grid. [`selftest`] holds the built-in invariant checks
//! behind the `selftest` CLI subcommand.

pub mod config;
pub mod runner;
pub mod selftest;
pub mod stats;
pub mod sweep;

pub use config::{
    AlgorithmConfig, EnvironmentConfig, ExperimentConfig, ExpertsConfig, RunConfig,
};
pub use runner::{run_experiment, ExperimentReport, RunSummary, TRACE_HEADER};
pub use selftest::{selftest, CheckResult, SelftestOptions, SelftestReport};
pub use stats::mean_std;
pub use sweep::{run_sweep, SweepGrid, SweepOutcome, SweepRow};
