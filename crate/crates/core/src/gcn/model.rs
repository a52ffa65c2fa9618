//! Two-layer GCN: `softmax(Â · ReLU(Â · X · W0) · W1)`, no bias terms.

use ndarray::{Array2, Zip};
use rand::Rng;

use crate::adjacency::NormalizedAdjacency;
use crate::error::{Error, Result};
use crate::graph::NodeSetView;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    w0: Array2<f64>,
    w1: Array2<f64>,
    dropout_rate: f64,
    trained: bool,
}

impl GcnModel {
    pub fn new(w0: Array2<f64>, w1: Array2<f64>, dropout_rate: f64) -> Result<Self> {
        if w0.ncols() != w1.nrows() {
            return Err(Error::DimensionMismatch {
                what: "hidden dimension of W1",
                expected: w0.ncols(),
                found: w1.nrows(),
            });
        }
        if w0.ncols() == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout rate {dropout_rate} outside [0, 1)"
            )));
        }
        if w0.iter().chain(w1.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite weight".into()));
        }
        Ok(Self {
            w0,
            w1,
            dropout_rate,
            trained: false,
        })
    }

    /// Glorot-uniform initialization, bound `scale · sqrt(6 / (fan_in + fan_out))`.
    pub fn init<R: Rng + ?Sized>(
        feature_dim: usize,
        hidden_dim: usize,
        num_classes: usize,
        dropout_rate: f64,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let w0 = glorot(feature_dim, hidden_dim, scale, rng);
        let w1 = glorot(hidden_dim, num_classes, scale, rng);
        Self::new(w0, w1, dropout_rate)
    }

    pub fn w0(&self) -> &Array2<f64> {
        &self.w0
    }

    pub fn w1(&self) -> &Array2<f64> {
        &self.w1
    }

    pub fn feature_dim(&self) -> usize {
        self.w0.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w1.ncols()
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub(crate) fn mark_trained(&mut self) {
        self.trained = true;
    }

    pub(crate) fn params_mut(&mut self) -> (&mut Array2<f64>, &mut Array2<f64>) {
        (&mut self.w0, &mut self.w1)
    }
}

pub(crate) fn glorot<R: Rng + ?Sized>(
    fan_in: usize,
    fan_out: usize,
    scale: f64,
    rng: &mut R,
) -> Array2<f64> {
    let bound = scale * (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..=bound))
}

/// Row-stochastic class posteriors plus their argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    posteriors: Array2<f64>,
    hard_labels: Vec<usize>,
}

impl PredictionSet {
    /// Row-wise softmax of `logits` (max-shifted).
    pub fn from_logits(logits: &Array2<f64>) -> Self {
        let mut posteriors = logits.clone();
        for mut row in posteriors.rows_mut() {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|z| (z - max).exp());
            let sum = row.sum();
            row.mapv_inplace(|p| p / sum);
        }
        Self::from_posteriors(posteriors)
    }

    pub fn from_posteriors(posteriors: Array2<f64>) -> Self {
        let hard_labels = posteriors.rows().into_iter().map(|r| argmax(r.iter())).collect();
        Self {
            posteriors,
            hard_labels,
        }
    }

    pub fn posteriors(&self) -> &Array2<f64> {
        &self.posteriors
    }

    pub fn hard_labels(&self) -> &[usize] {
        &self.hard_labels
    }

    pub fn num_nodes(&self) -> usize {
        self.posteriors.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.posteriors.ncols()
    }
}

/// Index of the largest value; lowest index wins ties.
pub fn argmax<'a>(values: impl Iterator<Item = &'a f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in values.enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Inverted-dropout multipliers for the hidden activation: each entry is
/// either 0 or `1 / (1 - rate)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    scale: Array2<f64>,
}

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Self {
        let keep = 1.0 / (1.0 - rate);
        let scale = Array2::from_shape_simple_fn((rows, cols), || {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        });
        Self { scale }
    }

    pub fn from_scale(scale: Array2<f64>) -> Self {
        Self { scale }
    }

    pub fn scale(&self) -> &Array2<f64> {
        &self.scale
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct ForwardPass {
    pub z1: Array2<f64>,
    pub hidden: Array2<f64>,
    pub logits: Array2<f64>,
    pub prediction: PredictionSet,
}

pub(crate) fn check_inputs(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    attrs: &CsrMatrix,
) -> Result<()> {
    if attrs.cols() != model.feature_dim() {
        return Err(Error::DimensionMismatch {
            what: "attribute columns vs W0 rows",
            expected: model.feature_dim(),
            found: attrs.cols(),
        });
    }
    if adj.size() != attrs.rows() {
        return Err(Error::DimensionMismatch {
            what: "adjacency size vs attribute rows",
            expected: attrs.rows(),
            found: adj.size(),
        });
    }
    Ok(())
}

pub(crate) fn forward_pass(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    attrs: &CsrMatrix,
    dropout: Option<&DropoutMask>,
) -> Result<ForwardPass> {
    check_inputs(model, adj, attrs)?;
    let z1 = adj.apply(&attrs.spmm(&model.w0));
    let mut hidden = z1.mapv(|v| v.max(0.0));
    if let Some(mask) = dropout {
        if mask.scale.dim() != hidden.dim() {
            return Err(Error::DimensionMismatch {
                what: "dropout mask rows",
                expected: hidden.nrows(),
                found: mask.scale.nrows(),
            });
        }
        hidden *= &mask.scale;
    }
    let logits = adj.apply(&hidden.dot(&model.w1));
    let prediction = PredictionSet::from_logits(&logits);
    Ok(ForwardPass {
        z1,
        hidden,
        logits,
        prediction,
    })
}

/// Evaluates the model. In training mode a fresh dropout mask is drawn from
/// `rng`; in eval mode `rng` is untouched and the call is a pure function.
pub fn forward<R: Rng + ?Sized>(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    attrs: &CsrMatrix,
    training_mode: bool,
    rng: &mut R,
) -> Result<PredictionSet> {
    let mask = (training_mode && model.dropout_rate > 0.0)
        .then(|| DropoutMask::sample(attrs.rows(), model.hidden_dim(), model.dropout_rate, rng));
    Ok(forward_pass(model, adj, attrs, mask.as_ref())?.prediction)
}

/// Eval-mode forward pass.
pub fn predict(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    attrs: &CsrMatrix,
) -> Result<PredictionSet> {
    Ok(forward_pass(model, adj, attrs, None)?.prediction)
}

/// `(node, class)` pairs for the masked nodes.
pub fn masked_targets(labels: &[Option<usize>], mask: &NodeSetView) -> Result<Vec<(usize, usize)>> {
    if mask.is_empty() {
        return Err(Error::EmptyNodeSet("loss mask"));
    }
    mask.ids()
        .iter()
        .map(|&v| match labels.get(v) {
            Some(Some(c)) => Ok((v, *c)),
            Some(None) => Err(Error::MissingLabel(v)),
            None => Err(Error::UnknownNode {
                id: v,
                num_nodes: labels.len(),
            }),
        })
        .collect()
}

/// Mean negative log posterior of the true class over the mask; posteriors
/// are floored at 1e-12 before the log.
pub fn nll_loss(pred: &PredictionSet, labels: &[Option<usize>], mask: &NodeSetView) -> Result<f64> {
    let targets = masked_targets(labels, mask)?;
    let total: f64 = targets
        .iter()
        .map(|&(v, c)| -pred.posteriors[[v, c]].max(1e-12).ln())
        .sum();
    Ok(total / targets.len() as f64)
}

/// Fused log-softmax + NLL on raw logits; this is the objective that
/// [`backward`] differentiates.
pub(crate) fn logit_loss(logits: &Array2<f64>, targets: &[(usize, usize)]) -> f64 {
    let total: f64 = targets
        .iter()
        .map(|&(v, c)| {
            let row = logits.row(v);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            lse - row[c]
        })
        .sum();
    total / targets.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
}

/// `∂L/∂logits` for the fused loss: `(softmax − onehot) / |mask|` on masked rows.
pub(crate) fn logit_gradient(pred: &PredictionSet, targets: &[(usize, usize)]) -> Array2<f64> {
    let mut d = Array2::zeros(pred.posteriors.dim());
    let inv = 1.0 / targets.len() as f64;
    for &(v, c) in targets {
        let mut row = d.row_mut(v);
        row.assign(&pred.posteriors.row(v));
        row[c] -= 1.0;
        row.mapv_inplace(|g| g * inv);
    }
    d
}

pub(crate) fn backward_pass(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    attrs_t: &CsrMatrix,
    pass: &ForwardPass,
    targets: &[(usize, usize)],
    dropout: Option<&DropoutMask>,
) -> Gradients {
    let d_logits = logit_gradient(&pass.prediction, targets);
    // Â is symmetric, so Âᵀ = Â
    let d_hw = adj.apply(&d_logits);
    let w1 = pass.hidden.t().dot(&d_hw);
    let mut d_hidden = d_hw.dot(&model.w1.t());
    if let Some(mask) = dropout {
        d_hidden *= &mask.scale;
    }
    Zip::from(&mut d_hidden)
        .and(&pass.z1)
        .for_each(|g, &z| {
            if z <= 0.0 {
                *g = 0.0;
            }
        });
    let d_xw = adj.apply(&d_hidden);
    let w0 = attrs_t.spmm(&d_xw);
    Gradients { w0, w1 }
}

/// Exact gradients of the masked NLL with respect to `W0` and `W1`, using the
/// dropout mask of the paired forward call (or none).
pub fn backward(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    attrs: &CsrMatrix,
    labels: &[Option<usize>],
    mask: &NodeSetView,
    dropout: Option<&DropoutMask>,
) -> Result<Gradients> {
    let targets = masked_targets(labels, mask)?;
    if labels.len() != attrs.rows() {
        return Err(Error::DimensionMismatch {
            what: "label count",
            expected: attrs.rows(),
            found: labels.len(),
        });
    }
    let pass = forward_pass(model, adj, attrs, dropout)?;
    Ok(backward_pass(model, adj, &attrs.transpose(), &pass, &targets, dropout))
}

/// Loss of the fused objective for given weights; used by gradient checks.
pub fn objective(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    attrs: &CsrMatrix,
    labels: &[Option<usize>],
    mask: &NodeSetView,
    dropout: Option<&DropoutMask>,
) -> Result<f64> {
    let targets = masked_targets(labels, mask)?;
    let pass = forward_pass(model, adj, attrs, dropout)?;
    Ok(logit_loss(&pass.logits, &targets))
}

/// Fraction of `targets` whose argmax matches.
pub(crate) fn target_accuracy(pred: &PredictionSet, targets: &[(usize, usize)]) -> f64 {
    if targets.is_empty() {
        return f64::NAN;
    }
    let hits = targets
        .iter()
        .filter(|&&(v, c)| pred.hard_labels[v] == c)
        .count();
    hits as f64 / targets.len() as f64
}

#[cfg(test)]
pub(crate) fn row_sums(a: &Array2<f64>) -> Vec<f64> {
    a.sum_axis(ndarray::Axis(1)).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjacency::normalize_adjacency;
    use crate::graph::{Graph, NodeRole};
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_uniform_rows() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let adj = normalize_adjacency(&g);
        let x = CsrMatrix::from_dense(&array![[1.0, 2.0], [0.0, 1.0], [3.0, 0.0], [0.0, 0.0]]);
        let model = GcnModel::new(Array2::zeros((2, 4)), Array2::zeros((4, 3)), 0.5).unwrap();
        let pred = predict(&model, &adj, &x).unwrap();
        for p in pred.posteriors().iter() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(pred.hard_labels(), &[0, 0, 0, 0]);
    }

    #[test]
    fn shape_and_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = Graph::new(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let adj = normalize_adjacency(&g);
        let x = CsrMatrix::from_dense(&Array2::from_shape_fn((5, 4), |(i, j)| (i + j) as f64 * 0.1));
        let model = GcnModel::init(4, 16, 3, 0.5, 1.0, &mut rng).unwrap();
        let pred = forward(&model, &adj, &x, true, &mut rng).unwrap();
        assert_eq!(pred.posteriors().dim(), (5, 3));
        for s in row_sums(pred.posteriors()) {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let adj = normalize_adjacency(&g);
        let model = GcnModel::new(Array2::zeros((3, 2)), Array2::zeros((2, 2)), 0.0).unwrap();
        let x = CsrMatrix::zeros(2, 4);
        assert!(matches!(
            predict(&model, &adj, &x),
            Err(Error::DimensionMismatch { .. })
        ));
        let adj3 = normalize_adjacency(&Graph::new(3, []).unwrap());
        assert!(predict(&model, &adj3, &CsrMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn model_invariants_enforced() {
        assert!(GcnModel::new(Array2::zeros((2, 2)), Array2::zeros((3, 2)), 0.0).is_err());
        assert!(GcnModel::new(Array2::zeros((2, 2)), Array2::zeros((2, 2)), 1.0).is_err());
        let mut w = Array2::zeros((2, 2));
        w[[0, 0]] = f64::NAN;
        assert!(GcnModel::new(w, Array2::zeros((2, 2)), 0.0).is_err());
    }

    #[test]
    fn nll_examples() {
        let labels = vec![Some(0), Some(1)];
        let both = NodeSetView::new(vec![0, 1], NodeRole::Other).unwrap();
        let perfect = PredictionSet::from_posteriors(array![[1.0, 0.0], [0.0, 1.0]]);
        assert!(nll_loss(&perfect, &labels, &both).unwrap().abs() < 1e-15);

        let uniform = PredictionSet::from_posteriors(Array2::from_elem((1, 7), 1.0 / 7.0));
        let one = NodeSetView::new(vec![0], NodeRole::Other).unwrap();
        let l = nll_loss(&uniform, &[Some(3)], &one).unwrap();
        assert!((l - 7f64.ln()).abs() < 1e-12);

        let mixed = PredictionSet::from_posteriors(array![[0.5, 0.5], [0.75, 0.25]]);
        let l = nll_loss(&mixed, &labels, &both).unwrap();
        assert!((l - (-(0.5f64).ln() - (0.25f64).ln()) / 2.0).abs() < 1e-12);

        let empty = NodeSetView::new(vec![], NodeRole::Other).unwrap();
        assert!(nll_loss(&mixed, &labels, &empty).is_err());
        assert!(matches!(
            nll_loss(&mixed, &[Some(0), None], &both),
            Err(Error::MissingLabel(1))
        ));
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax([0.2, 0.4, 0.4].iter()), 1);
        let p = PredictionSet::from_posteriors(array![[0.5, 0.5]]);
        assert_eq!(p.hard_labels(), &[0]);
    }

    #[test]
    fn dropout_mask_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DropoutMask::sample(50, 8, 0.5, &mut rng);
        assert!(m.scale().iter().all(|&s| s == 0.0 || s == 2.0));
        let kept = m.scale().iter().filter(|&&s| s > 0.0).count();
        assert!(kept > 120 && kept < 280);
    }
}
