//! Experiment harness and acceptance suites behind the `bench` binary.

pub mod experiments;
pub mod suites;
pub mod tiny;

pub use experiments::{
    aggregate, csv_bytes, read_rows, run_experiment, write_outputs, AggregateRow, ExperimentConfig, ExperimentId,
    ExperimentResult, Row, SweepParam, TimingRow,
};
pub use suites::{run_suite, SuiteId, SuiteReport, DEFAULT_SEED};
