//! Experiment configs, result tables and the commands behind the CLI.
//!
//! Every command expands its config into independent grid cells, runs the
//! cells through [`crate::par`] with seeds derived from the master seed and
//! the cell coordinates, and assembles the rows in grid order, so a report is
//! byte-identical for a given config regardless of thread count.

mod commands;
mod config;
mod report;

pub use commands::{
    circuit_run, cmd_concentration, cmd_endtoend, cmd_separation, cmd_verify_lemmas, run, separation_cell,
    Family, CALIBRATED_C,
};
pub use config::{ExperimentConfig, ExperimentKind, Grid, Options};
pub use report::{loglog_slope, wilson_interval, Relation, Report, ResultRow, TrialRecord};

/// Format version written into every CSV header.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
