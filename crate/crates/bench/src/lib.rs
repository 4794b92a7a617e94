//! Benchmark harness for the ECF robust mean estimator: experiment configs,
//! seeded trials, rate sweeps, theory suites and CSV/JSONL output.

pub mod config;
pub mod error;
pub mod output;
pub mod rates;
pub mod runner;
pub mod verify;

pub use config::{EstimatorId, ExperimentConfig, RadiusMode};
pub use error::{BenchError, Result};
pub use runner::{run_experiment, ExperimentReport, RunOptions, TrialRecord, Tuning};
