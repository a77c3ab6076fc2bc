//! Experiment orchestration: configuration, seeded runs over parameter
//! grids, CSV output and the command-line front end.

pub mod cli;
pub mod config;
pub mod run;

pub use config::{AttackKind, ExperimentConfig, VerificationMode};
pub use run::{
    run_experiment, run_seed, write_results, write_traces, ExperimentOutput, ResultRow, TraceRow,
};
