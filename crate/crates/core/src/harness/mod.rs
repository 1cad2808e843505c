//! Run configuration, the run driver, experiment presets, the check suites
//! and the snapshot format.

pub mod check;
pub mod config;
pub mod presets;
pub mod run;
pub mod snapshot;

pub use check::{run_checks, CheckOptions, CheckReport};
pub use config::{Dimension, Filter, Monitor, RunConfig};
pub use presets::{experiment, threshold_bisect, twin_run, ExperimentReport, Preset};
pub use run::{exit_code, initial_state, run, run_in_memory, run_observed, AnyState, MonitorResult, RunOutcome, RunSummary, Stepper};
pub use snapshot::{snapshot_header, snapshot_read, snapshot_write, Snapshot, SnapshotHeader};
