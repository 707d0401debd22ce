//! Experiment plumbing: configuration files, training runs with CSV metrics
//! and checkpoints, oracle reports and smoothed plot series.

pub mod config;
pub mod metrics;
pub mod run;

pub use config::{load_config, parse_config, AgentKind, RunConfig};
pub use metrics::{
    emit_plot_data, read_metrics, smooth, write_metrics, METRICS_HEADER, PLOT_WINDOW,
};
pub use run::{run_oracle, run_training, OracleReport, TrainingReport};
