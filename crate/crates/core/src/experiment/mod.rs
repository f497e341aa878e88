//! Configuration-driven experiments: one JSON config selects a space and a
//! list of checks; each check yields a report with its measured constants.

pub mod anchors;
pub mod config;
pub mod functions;
pub mod report;
pub mod runner;

pub use anchors::{Anchor, Check, REGISTRY};
pub use config::{CheckOptions, CubeConfig, ExperimentConfig, WeightRef, SCHEMA};
pub use functions::{read_functions_csv, write_functions_csv};
pub use report::{
    emit_report, read_reports, to_csv_bytes, to_json_bytes, Report, ReportFormat, Summary,
    SummaryEntry,
};
pub use runner::{discretize_config, run_experiment, write_outputs, Context, Experiment};
