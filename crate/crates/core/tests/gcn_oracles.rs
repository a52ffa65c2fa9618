//! Forward and backward passes against dense step-by-step oracles.

mod common;

use gnnx_core::gcn::{backward, objective, predict, train, GcnModel, TrainConfig};
use gnnx_core::{normalize_adjacency, CsrMatrix, Graph, NodeRole, NodeSetView};
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_forward(a: &Array2<f64>, x: &Array2<f64>, w0: &Array2<f64>, w1: &Array2<f64>) -> Array2<f64> {
    let h = a.dot(x).dot(w0).mapv(|v| v.max(0.0));
    let z = a.dot(&h).dot(w1);
    let mut p = z.clone();
    for mut row in p.rows_mut() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    p
}

#[test]
fn single_node_self_loop_example() {
    let g = Graph::new(1, []).unwrap();
    let x = array![[1.0, 0.0]];
    let w0 = array![[1.0, 0.0], [0.0, 1.0]];
    let w1 = array![[3.0, 0.0], [0.0, 0.0]];
    let model = GcnModel::new(w0.clone(), w1.clone(), 0.5).unwrap();
    let got = predict(&model, &normalize_adjacency(&g), &CsrMatrix::from_dense(&x)).unwrap();
    let want = dense_forward(&common::dense_normalized(&g), &x, &w0, &w1);
    let e3 = 3f64.exp();
    assert!((want[[0, 0]] - e3 / (e3 + 1.0)).abs() < 1e-15);
    for (g, w) in got.posteriors().iter().zip(want.iter()) {
        assert!((g - w).abs() < 1e-12);
    }
}

#[test]
fn random_forward_matches_dense_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let n = r.random_range(2..15);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if r.random_bool(0.25) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(n, edges).unwrap();
        let x = Array2::from_shape_fn((n, 5), |_| if r.random_bool(0.4) { 1.0 } else { 0.0 });
        let w0 = Array2::from_shape_fn((5, 4), |_| r.random_range(-1.0..1.0));
        let w1 = Array2::from_shape_fn((4, 3), |_| r.random_range(-1.0..1.0));
        let model = GcnModel::new(w0.clone(), w1.clone(), 0.5).unwrap();
        let got = predict(&model, &normalize_adjacency(&g), &CsrMatrix::from_dense(&x)).unwrap();
        let want = dense_forward(&common::dense_normalized(&g), &x, &w0, &w1);
        for (a, b) in got.posteriors().iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

/// With a one-node mask, the masked loss gradient only involves that node's
/// row of the output; it must still match finite differences of that loss.
#[test]
fn one_node_mask_gradient() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let g = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)]).unwrap();
    let adj = normalize_adjacency(&g);
    let x = CsrMatrix::from_dense(&Array2::from_shape_fn((6, 4), |_| r.random_range(0.0..1.0)));
    let labels: Vec<Option<usize>> = vec![Some(0), Some(1), Some(2), Some(0), Some(1), Some(2)];
    let w0 = Array2::from_shape_fn((4, 5), |_| r.random_range(-1.0..1.0));
    let w1 = Array2::from_shape_fn((5, 3), |_| r.random_range(-1.0..1.0));
    let model = GcnModel::new(w0.clone(), w1.clone(), 0.5).unwrap();
    let h = 1e-5;
    let mut sum = Array2::<f64>::zeros(w1.dim());
    for node in 0..6 {
        let mask = NodeSetView::new(vec![node], NodeRole::Other).unwrap();
        let grads = backward(&model, &adj, &x, &labels, &mask, None).unwrap();
        for idx in ndarray::indices(w1.dim()) {
            let mut p = w1.clone();
            p[idx] += h;
            let up = objective(&GcnModel::new(w0.clone(), p.clone(), 0.5).unwrap(), &adj, &x, &labels, &mask, None).unwrap();
            p[idx] -= 2.0 * h;
            let down = objective(&GcnModel::new(w0.clone(), p, 0.5).unwrap(), &adj, &x, &labels, &mask, None).unwrap();
            let numeric = (up - down) / (2.0 * h);
            assert!((grads.w1[idx] - numeric).abs() <= 1e-4 * numeric.abs().max(grads.w1[idx].abs()) + 1e-9);
        }
        sum += &grads.w1;
    }
    // the full-mask gradient is the mean of the one-node gradients
    let all = NodeSetView::new((0..6).collect(), NodeRole::Other).unwrap();
    let full = backward(&model, &adj, &x, &labels, &all, None).unwrap();
    for (a, b) in full.w1.iter().zip(sum.iter()) {
        assert!((a - b / 6.0).abs() < 1e-12);
    }
}

#[test]
fn overfit_toy_has_vanishing_gradient() {
    let g = Graph::new(2, [])
        .unwrap()
        .with_attributes(CsrMatrix::from_dense(&array![[1.0, 0.0], [0.0, 1.0]]))
        .unwrap()
        .with_labels(vec![Some(0), Some(1)])
        .unwrap();
    let cfg = TrainConfig {
        epochs: 20_000,
        dropout_rate: 0.0,
        learning_rate: 0.1,
        ..TrainConfig::default()
    };
    let mask = NodeSetView::new(vec![0, 1], NodeRole::Other).unwrap();
    let none = NodeSetView::new(vec![], NodeRole::Other).unwrap();
    let model = train(&g, &mask, &none, 2, &cfg).unwrap();
    let grads = backward(
        &model,
        &normalize_adjacency(&g),
        g.attributes().unwrap(),
        g.labels().unwrap(),
        &mask,
        None,
    )
    .unwrap();
    let norm = grads.w0.iter().chain(grads.w1.iter()).map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm < 1e-6, "gradient norm {norm}");
}
