//! Experiment plumbing: regret bookkeeping, config-driven runs, CSV and SVG output.

pub mod aggregate;
pub mod experiment;
pub mod oracle_check;
pub mod plot;
pub mod regret;

pub use aggregate::{aggregate, read_aggregate_csv, write_aggregate_csv, AggregateRow};
pub use experiment::{
    build_environment, run_cell, run_experiment, run_experiment_config, Algorithm, EnvironmentName,
    ExperimentConfig, Manifest,
};
pub use oracle_check::{oracle_check, OracleCheckReport};
pub use plot::{emit_plot, render_svg, PlotGeometry, PlotKind};
pub use regret::{
    compute_regret, compute_regret_with, sample_complexity_curve, RegretEvaluator, RunRecord,
};
