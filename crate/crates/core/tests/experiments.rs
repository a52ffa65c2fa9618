//! Experiment runner and sweep outputs.

mod common;

use gnnx_core::eval::{accuracy, run_experiment, run_sweep, sweep_csv, ExperimentConfig, Method, SweepAxis};
use gnnx_core::gcn::TrainConfig;
use gnnx_core::{rng, Error};
use rand::Rng;

fn config(id: u8, seeds: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_attack(id);
    cfg.seeds = (0..seeds as u64).collect();
    cfg.train = TrainConfig {
        epochs: 60,
        ..TrainConfig::default()
    };
    cfg
}

#[test]
fn report_has_one_row_per_seed_and_the_expected_fields() {
    let b = common::fixture("synth-cora");
    let r = run_experiment(&b, &config(0, 5)).unwrap();
    assert_eq!(r.per_seed.len(), 5);
    assert!(!r.aggregate.single_seed);
    let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    for key in ["config", "per_seed", "aggregate"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for key in ["seed", "accuracy", "fidelity", "queries", "seconds"] {
        assert!(v["per_seed"][0].get(key).is_some(), "{key}");
    }
    for key in ["accuracy_mean", "accuracy_std", "fidelity_mean", "fidelity_std"] {
        assert!(v["aggregate"][key].is_number(), "{key}");
    }
    assert!(v["per_seed"][0]["seconds"].is_null());
    assert_eq!(v["config"]["dataset"], "synth-cora");
}

#[test]
fn query_counts_follow_the_budget() {
    let b = common::fixture("synth-cora");
    let r0 = run_experiment(&b, &config(0, 2)).unwrap();
    assert!(r0.per_seed.iter().all(|s| s.queries == 150), "floor(0.25 * 600)");
    let r3 = run_experiment(&b, &config(3, 2)).unwrap();
    assert!(r3.per_seed.iter().all(|s| s.queries == 0));
    let mut base = config(1, 2);
    base.method = Method::DnnBaseline;
    let rb = run_experiment(&b, &base).unwrap();
    assert!(rb.per_seed.iter().all(|s| s.queries == 150));
}

#[test]
fn baseline_needs_attributes() {
    let mut cfg = config(2, 1);
    cfg.method = Method::DnnBaseline;
    assert!(matches!(cfg.validate(), Err(Error::Taxonomy { attack: 2, .. })));
}

#[test]
fn single_seed_reports_zero_spread() {
    let b = common::fixture("synth-citeseer");
    let r = run_experiment(&b, &config(2, 1)).unwrap();
    assert!(r.aggregate.single_seed);
    assert_eq!(r.aggregate.fidelity_std, 0.0);
}

#[test]
fn sweep_emits_one_report_per_value_and_two_csv_rows_each() {
    let b = common::fixture("synth-cora");
    let values: Vec<String> = ["0.3", "0.6", "0.9"].iter().map(|s| s.to_string()).collect();
    let reports = run_sweep(&b, &config(0, 1), SweepAxis::Alpha, &values).unwrap();
    assert_eq!(reports.len(), 3);
    assert_eq!(reports[2].config.attack.alpha, 0.9);
    let csv = sweep_csv(&values, &reports);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "axis_value,metric,mean,std");
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[1].starts_with("0.3,accuracy,"));
    assert!(lines[2].starts_with("0.3,fidelity,"));
}

#[test]
fn uniform_guessing_scores_about_one_in_seven() {
    let mut r = rng::stream(0, 42);
    let labels: Vec<Option<usize>> = (0..1000).map(|i| Some(i % 7)).collect();
    let preds: Vec<usize> = (0..1000).map(|_| r.random_range(0..7)).collect();
    let nodes: Vec<usize> = (0..1000).collect();
    let acc = accuracy(&preds, &labels, &nodes).unwrap();
    assert!((acc - 1.0 / 7.0).abs() < 0.05, "{acc}");
}
