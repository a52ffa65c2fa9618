use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::model::{
    backward_pass, forward_pass, logit_loss, masked_targets, predict, target_accuracy, DropoutMask,
    GcnModel,
};
use crate::adjacency::{normalize_adjacency, NormalizedAdjacency};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSetView};
use crate::rng;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub weight_init_scale: f64,
    pub hidden_dim: usize,
    pub dropout_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            epochs: 200,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            weight_init_scale: 1.0,
            hidden_dim: 16,
            dropout_rate: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig("dropout_rate must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Per-epoch training trace.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub loss: Vec<f64>,
    pub train_accuracy: Vec<f64>,
    /// `None` when the validation mask is empty.
    pub val_accuracy: Vec<Option<f64>>,
}

/// Borrowed model inputs: `Â`, attributes and per-node labels.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub adj: &'a NormalizedAdjacency,
    pub attrs: &'a CsrMatrix,
    pub labels: &'a [Option<usize>],
}

/// Full-batch Adam on the masked NLL for `cfg.epochs` epochs; returns the
/// final-epoch model.
pub fn train(
    g: &Graph,
    train_mask: &NodeSetView,
    val_mask: &NodeSetView,
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<GcnModel> {
    Ok(train_with_history(g, train_mask, val_mask, num_classes, cfg)?.0)
}

pub fn train_with_history(
    g: &Graph,
    train_mask: &NodeSetView,
    val_mask: &NodeSetView,
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<(GcnModel, TrainHistory)> {
    let attrs = g
        .attributes()
        .ok_or_else(|| Error::InvalidConfig("training graph has no attributes".into()))?;
    let labels = g
        .labels()
        .ok_or_else(|| Error::InvalidConfig("training graph has no labels".into()))?;
    let adj = normalize_adjacency(g);
    let data = TrainingData {
        adj: &adj,
        attrs,
        labels,
    };
    train_on(data, train_mask, val_mask, num_classes, cfg)
}

pub fn train_on(
    data: TrainingData<'_>,
    train_mask: &NodeSetView,
    val_mask: &NodeSetView,
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<(GcnModel, TrainHistory)> {
    let mut init_rng = rng::stream(cfg.seed, rng::STREAM_WEIGHT_INIT);
    let mut dropout_rng = rng::stream(cfg.seed, rng::STREAM_DROPOUT);
    train_with_streams(data, train_mask, val_mask, num_classes, cfg, &mut init_rng, &mut dropout_rng)
}

pub(crate) fn train_with_streams<R1: Rng, R2: Rng>(
    data: TrainingData<'_>,
    train_mask: &NodeSetView,
    val_mask: &NodeSetView,
    num_classes: usize,
    cfg: &TrainConfig,
    init_rng: &mut R1,
    dropout_rng: &mut R2,
) -> Result<(GcnModel, TrainHistory)> {
    cfg.validate()?;
    if num_classes == 0 {
        return Err(Error::InvalidConfig("num_classes must be >= 1".into()));
    }
    if train_mask.is_empty() {
        return Err(Error::EmptyNodeSet("no labeled training nodes"));
    }
    let targets = masked_targets(data.labels, train_mask)?;
    if let Some(&(v, c)) = targets.iter().find(|&&(_, c)| c >= num_classes) {
        return Err(Error::InvalidConfig(format!(
            "node {v} has label {c} but the model has {num_classes} classes"
        )));
    }
    let val_targets = if val_mask.is_empty() {
        Vec::new()
    } else {
        masked_targets(data.labels, val_mask)?
    };

    let mut model = GcnModel::init(
        data.attrs.cols(),
        cfg.hidden_dim,
        num_classes,
        cfg.dropout_rate,
        cfg.weight_init_scale,
        init_rng,
    )?;
    super::model::check_inputs(&model, data.adj, data.attrs)?;
    let attrs_t = data.attrs.transpose();
    let mut adam = Adam::new(
        cfg.learning_rate,
        cfg.adam_beta1,
        cfg.adam_beta2,
        cfg.adam_epsilon,
        &[model.w0().dim(), model.w1().dim()],
    );
    let mut history = TrainHistory::default();
    let n = data.attrs.rows();

    for epoch in 0..cfg.epochs {
        let mask = (cfg.dropout_rate > 0.0)
            .then(|| DropoutMask::sample(n, cfg.hidden_dim, cfg.dropout_rate, dropout_rng));
        let pass = forward_pass(&model, data.adj, data.attrs, mask.as_ref())?;
        let loss = logit_loss(&pass.logits, &targets);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("loss became {loss} at epoch {epoch}")));
        }
        let grads = backward_pass(&model, data.adj, &attrs_t, &pass, &targets, mask.as_ref());
        {
            let (w0, w1) = model.params_mut();
            adam.step(&mut [w0, w1], &[&grads.w0, &grads.w1]);
        }
        history.loss.push(loss);
        history
            .train_accuracy
            .push(target_accuracy(&pass.prediction, &targets));
        if val_targets.is_empty() {
            history.val_accuracy.push(None);
        } else {
            let eval = predict(&model, data.adj, data.attrs)?;
            history
                .val_accuracy
                .push(Some(target_accuracy(&eval, &val_targets)));
        }
    }
    if model.w0().iter().chain(model.w1().iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite weights after training".into()));
    }
    model.mark_trained();
    Ok((model, history))
}
