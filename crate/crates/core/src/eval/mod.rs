//! Metrics, multi-seed experiments, parameter sweeps and reports.

mod experiment;
mod metrics;
mod sweep;

pub use experiment::{
    attack_victim, dnn_baseline, prepare_scenario, run_experiment, run_experiment_with, run_seed,
    train_victim, Aggregate, EvalNodes, ExperimentConfig, ExperimentReport, Extracted, Method,
    Scenario, SeedResult,
};
pub use metrics::{accuracy, degree_distribution, degree_table, fidelity, mean_std, spearman};
pub use sweep::{run_sweep, sweep_configs, sweep_csv, SweepAxis};
