//! Experiment runner, comparison metrics and report files.

pub mod config;
pub mod experiment;
pub mod metrics;

pub use config::{ExperimentConfig, Method, TimeRule};
pub use experiment::{
    cell_seed, instance_name, read_bks, read_results, run_experiment, summarize, Report, ResultRow, SummaryRow,
};
pub use metrics::{performance_profile, rpd, wilcoxon_one_sided, Profile, Wilcoxon};
