//! Oracles and fixtures shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gnnx_core::datasets::{load_bundle, DatasetBundle};
use gnnx_core::gcn::{backward, objective, DropoutMask, GcnModel, Mlp};
use gnnx_core::{normalize_adjacency, CsrMatrix, Graph, NodeRole, NodeSetView};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(name: &str) -> DatasetBundle {
    load_bundle(&fixtures_dir().join(name)).unwrap()
}

/// `D̂^-1/2 (A + I) D̂^-1/2` with dense loops.
pub fn dense_normalized(g: &Graph) -> Array2<f64> {
    let n = g.num_nodes();
    let mut a = Array2::<f64>::eye(n);
    for &(u, v) in g.edges() {
        a[[u, v]] = 1.0;
        a[[v, u]] = 1.0;
    }
    let d: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let mut out = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = a[[i, j]] / d[i].sqrt() / d[j].sqrt();
        }
    }
    out
}

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL: f64 = 1e-4;

fn close(analytic: f64, numeric: f64) -> bool {
    // the absolute floor only matters for gradients near the rounding noise of the difference quotient
    (analytic - numeric).abs() <= FD_REL * analytic.abs().max(numeric.abs()) + 1e-9
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| r.random_range(-1.0..1.0))
}

fn random_attrs(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CsrMatrix {
    let dense: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if r.random_bool(0.5) { r.random_range(0.1..1.0) } else { 0.0 })
                .collect()
        })
        .collect();
    CsrMatrix::from_dense_rows(cols, &dense).unwrap()
}

pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn check_entries(
    name: &str,
    param: &Array2<f64>,
    grad: &Array2<f64>,
    loss: impl Fn(&Array2<f64>) -> f64,
) -> Result<(), String> {
    for idx in ndarray::indices(param.dim()) {
        let mut p = param.clone();
        p[idx] += FD_STEP;
        let up = loss(&p);
        p[idx] -= 2.0 * FD_STEP;
        let down = loss(&p);
        let numeric = (up - down) / (2.0 * FD_STEP);
        if !close(grad[idx], numeric) {
            return Err(format!("{name} entry {idx:?}: analytic {} vs numeric {numeric}", grad[idx]));
        }
    }
    Ok(())
}

/// One random GCN instance; odd seeds run with a fixed dropout mask.
pub fn gcn_gradient_instance(seed: u64) -> Result<(), String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = r.random_range(3..10);
    let d = r.random_range(2..6);
    let hidden = r.random_range(2..5);
    let c = r.random_range(2..4);
    let g = random_graph(&mut r, n, 0.3);
    let adj = normalize_adjacency(&g);
    let x = random_attrs(&mut r, n, d);
    let labels: Vec<Option<usize>> = (0..n).map(|_| Some(r.random_range(0..c))).collect();
    let mut mask_ids: Vec<usize> = (0..n).filter(|_| r.random_bool(0.6)).collect();
    if mask_ids.is_empty() {
        mask_ids.push(0);
    }
    let mask = NodeSetView::new(mask_ids, NodeRole::Other).unwrap();
    let w0 = random_matrix(&mut r, d, hidden);
    let w1 = random_matrix(&mut r, hidden, c);
    let dropout = (seed % 2 == 1).then(|| DropoutMask::sample(n, hidden, 0.5, &mut r));
    let model = GcnModel::new(w0.clone(), w1.clone(), 0.5).unwrap();
    let grads = backward(&model, &adj, &x, &labels, &mask, dropout.as_ref()).unwrap();
    let loss = |w0: &Array2<f64>, w1: &Array2<f64>| {
        let m = GcnModel::new(w0.clone(), w1.clone(), 0.5).unwrap();
        objective(&m, &adj, &x, &labels, &mask, dropout.as_ref()).unwrap()
    };
    check_entries("gcn w0", &w0, &grads.w0, |p| loss(p, &w1))?;
    check_entries("gcn w1", &w1, &grads.w1, |p| loss(&w0, p))
}

/// One random MLP instance, biases included.
pub fn mlp_gradient_instance(seed: u64) -> Result<(), String> {
    let mut r = ChaCha8Rng::seed_from_u64(1000 + seed);
    let rows = r.random_range(2..10);
    let d = r.random_range(2..6);
    let hidden = r.random_range(2..6);
    let c = r.random_range(2..4);
    let x = random_attrs(&mut r, rows, d);
    let targets: Vec<(usize, usize)> = (0..rows).map(|i| (i, r.random_range(0..c))).collect();
    let w0 = random_matrix(&mut r, d, hidden);
    let b0 = Array1::from_shape_fn(hidden, |_| r.random_range(-0.5..0.5));
    let w1 = random_matrix(&mut r, hidden, c);
    let b1 = Array1::from_shape_fn(c, |_| r.random_range(-0.5..0.5));
    let build = |w0: &Array2<f64>, b0: &Array1<f64>, w1: &Array2<f64>, b1: &Array1<f64>| {
        Mlp::from_parts(w0.clone(), b0.clone(), w1.clone(), b1.clone(), 0.0).unwrap()
    };
    let grads = build(&w0, &b0, &w1, &b1).backward(&x, &targets).unwrap();
    let loss = |m: Mlp| m.objective(&x, &targets).unwrap();
    check_entries("mlp w0", &w0, &grads.w0, |p| loss(build(p, &b0, &w1, &b1)))?;
    check_entries("mlp w1", &w1, &grads.w1, |p| loss(build(&w0, &b0, p, &b1)))?;
    let as_row = |v: &Array1<f64>| v.clone().insert_axis(ndarray::Axis(0));
    let from_row = |p: &Array2<f64>| p.row(0).to_owned();
    check_entries("mlp b0", &as_row(&b0), &as_row(&grads.b0), |p| {
        loss(build(&w0, &from_row(p), &w1, &b1))
    })?;
    check_entries("mlp b1", &as_row(&b1), &as_row(&grads.b1), |p| {
        loss(build(&w0, &b0, &w1, &from_row(p)))
    })
}
