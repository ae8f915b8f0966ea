//! Experiment harness: config loading, run manifests and the `train`,
//! `eval`, `baseline` and `validate` commands.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{baseline, eval, train, validate, BaselineOptions, EvalOptions, TrainOptions, TrainOutcome};
pub use config::{load_experiment, Experiment, ExperimentFile, LoadedExperiment};
pub use manifest::{sha256_hex, Manifest, MANIFEST_FORMAT};
