//! Same seed and config, same bytes.

mod common;

use gnnx_core::eval::{prepare_scenario, run_experiment_with, run_seed, run_sweep, train_victim, ExperimentConfig, SweepAxis};
use gnnx_core::gcn::TrainConfig;
use gnnx_core::par::Exec;
use gnnx_core::rng;
use ndarray::Array2;

fn config(id: u8) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_attack(id);
    cfg.seeds = vec![0, 1];
    cfg.train = TrainConfig {
        epochs: 30,
        ..TrainConfig::default()
    };
    cfg
}

#[test]
fn reports_repeat_bitwise_in_both_exec_modes() {
    let b = common::fixture("synth-pubmed");
    for id in 0..7 {
        let cfg = config(id);
        let first = run_experiment_with(&b, &cfg, Exec::Serial).unwrap().to_json().unwrap();
        let again = run_experiment_with(&b, &cfg, Exec::Serial).unwrap().to_json().unwrap();
        let par = run_experiment_with(&b, &cfg, Exec::Parallel).unwrap().to_json().unwrap();
        assert_eq!(first, again, "attack-{id}");
        assert_eq!(first, par, "attack-{id}");
    }
}

#[test]
fn checkpoints_repeat_bitwise() {
    let b = common::fixture("synth-citeseer");
    for id in 0..7 {
        let cfg = config(id);
        let bytes = || {
            let (_, ex) = run_seed(&b, &cfg, 5).unwrap();
            ex.to_checkpoint(serde_json::json!({ "seed": 5 })).to_bytes().unwrap()
        };
        assert_eq!(bytes(), bytes(), "attack-{id}");
    }
    let cfg = config(0);
    let victim_bytes = || {
        let sc = prepare_scenario(&b, &cfg, 2).unwrap();
        let v = train_victim(&sc.target, &sc.split, &cfg.train, 2).unwrap();
        v.to_checkpoint(&cfg.train, serde_json::Value::Null).to_bytes().unwrap()
    };
    assert_eq!(victim_bytes(), victim_bytes());
}

#[test]
fn different_seeds_differ() {
    let b = common::fixture("synth-cora");
    let cfg = config(0);
    let sc = prepare_scenario(&b, &cfg, 0).unwrap();
    let a = train_victim(&sc.target, &sc.split, &cfg.train, 0).unwrap();
    let c = train_victim(&sc.target, &sc.split, &cfg.train, 1).unwrap();
    assert_ne!(a.w0(), c.w0());
}

#[test]
fn sweeps_repeat_bitwise() {
    let b = common::fixture("synth-cora");
    let mut cfg = config(0);
    cfg.seeds = vec![3];
    let values: Vec<String> = ["0.1", "0.2"].iter().map(|s| s.to_string()).collect();
    let run = || {
        run_sweep(&b, &cfg, SweepAxis::AttackerFraction, &values)
            .unwrap()
            .iter()
            .map(|r| r.to_json().unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn spmm_is_exec_independent() {
    let b = common::fixture("synth-pubmed");
    let x = b.graph.attributes().unwrap();
    let mut r = rng::stream(1, 99);
    let w = Array2::from_shape_fn((x.cols(), 16), |_| rand::Rng::random_range(&mut r, -1.0..1.0));
    assert_eq!(x.spmm_with(&w, Exec::Serial), x.spmm_with(&w, Exec::Parallel));
}
