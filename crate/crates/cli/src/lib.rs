//! Batch experiment harness for the grassradon library: TOML experiment specs in, CSV
//! reports with pass/fail verdicts out.

pub mod defaults;
pub mod experiments;
pub mod report;
pub mod spec;

pub use experiments::run_experiment;
pub use report::{all_pass, csv_string, emit_csv, write_csv, Metric, ResultRow};
pub use spec::{ExperimentSpec, Pipeline};
