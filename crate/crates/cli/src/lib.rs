//! Batch runner for `scstat-core`: JSON experiment configs, JSON reports,
//! CSV trajectory tables and seeded instance generators.

pub mod config;
pub mod generate;
pub mod report;
pub mod run;

pub use config::{CheckKind, ConfigError, ExperimentConfig, ParameterAxis};
pub use report::{RunReport, TrajectoryRow};
pub use run::{execute, write_outputs, RunError, RunOutcome};
