//! Experiment harness for LWPP warm-started VQE.
//!
//! [`config`] parses flat dotted-key configs and named presets,
//! [`experiment`] schedules seeded runs for each scenario, and [`records`]
//! defines the CSV and manifest outputs.

pub mod config;
pub mod error;
pub mod experiment;
pub mod records;
pub mod resample;

pub use config::{ExperimentConfig, Scenario, Strategy};
pub use error::{ConfigError, HarnessError, Result};
pub use experiment::{emit_records, evaluate, execute, execute_single, run_experiment, ExperimentOutput};
pub use records::{RunManifest, SummaryRow, TrajectoryRow};
pub use resample::resample_parameters;
