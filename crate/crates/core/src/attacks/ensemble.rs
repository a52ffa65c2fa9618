//! Attack-6: structure-only and shadow-trained models combined by an MLP.

use ndarray::{concatenate, Array2, Axis};

use super::graphs::{one_hot_graph, train_surrogate};
use super::{AttackKnowledge, KnownStructure};
use crate::adjacency::normalize_adjacency;
use crate::error::{Error, Result};
use crate::gcn::{predict, train_mlp, GcnModel, Mlp, PredictionSet, TrainConfig};
use crate::graph::Graph;
use crate::par::{self, Exec};
use crate::rng;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    /// One-hot model trained on the target structure with oracle labels.
    pub structural: GcnModel,
    /// One-hot model trained on the shadow structure.
    pub shadow_structural: GcnModel,
    /// Attribute model trained on the shadow graph.
    pub shadow_full: GcnModel,
    pub attack_mlp: Mlp,
    /// Shadow-structural posteriors of every shadow node.
    pub reference_structural: Array2<f64>,
    /// Shadow-full posteriors of every shadow node.
    pub reference_full: Array2<f64>,
}

/// Row-wise concatenation `[a | b]` as a sparse MLP input.
pub fn ensemble_inputs(a: &Array2<f64>, b: &Array2<f64>) -> Result<CsrMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            what: "stacked posterior rows",
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let stacked = concatenate(Axis(1), &[a.view(), b.view()])
        .map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(CsrMatrix::from_dense(&stacked))
}

/// The attack MLP: `2C → hidden → C`, no dropout, otherwise `cfg`'s optimizer settings.
pub fn train_attack_mlp(
    inputs: &CsrMatrix,
    targets: &[(usize, usize)],
    num_classes: usize,
    hidden: usize,
    cfg: &TrainConfig,
) -> Result<Mlp> {
    let mlp_cfg = TrainConfig {
        hidden_dim: hidden,
        dropout_rate: 0.0,
        seed: rng::derive_seed(cfg.seed, rng::TAG_ATTACK_MLP),
        ..cfg.clone()
    };
    train_mlp(inputs, targets, num_classes, &mlp_cfg)
}

fn one_hot_posteriors(model: &GcnModel, structure: &Graph) -> Result<Array2<f64>> {
    let adj = normalize_adjacency(structure);
    Ok(predict(model, &adj, &CsrMatrix::identity(structure.num_nodes()))?
        .posteriors()
        .clone())
}

/// Trains the three sub-models and the attack MLP.
///
/// At prediction time a target node has no attributes, so the shadow-full
/// slot of its MLP input is filled with the shadow-full posterior of the
/// shadow node whose shadow-structural posterior is nearest (Euclidean) to
/// the node's target-structural posterior.
pub fn run_attack6(k: &AttackKnowledge<'_>, cfg: &TrainConfig) -> Result<EnsembleModel> {
    let shadow = k.shadow(6)?;
    let full = match &k.structure {
        Some(KnownStructure::Full(g)) => g,
        _ => {
            return Err(Error::Taxonomy {
                attack: 6,
                missing: "full target structure",
            })
        }
    };
    let c = k.domain.num_classes;
    let val = k.params.surrogate_val_fraction;
    let shadow_labels = shadow.graph.labels().ok_or(Error::Taxonomy {
        attack: 6,
        missing: "shadow labels",
    })?;
    let train_labels: Vec<usize> = shadow
        .train
        .ids()
        .iter()
        .map(|&v| shadow_labels[v].ok_or(Error::MissingLabel(v)))
        .collect::<Result<_>>()?;
    let sub_cfg = cfg.with_seed(rng::derive_seed(cfg.seed, rng::TAG_SHADOW_MODEL));

    let structural_ag = one_hot_graph(&shadow.graph, &shadow.train, &train_labels)?;
    let shadow_structural = train_surrogate(&structural_ag, c, val, &sub_cfg)?;
    let shadow_full = train_surrogate(&super::build_attack3_graph(k)?, c, val, &sub_cfg)?;

    let reference_structural = one_hot_posteriors(&shadow_structural, &shadow.graph)?;
    let adj = normalize_adjacency(&shadow.graph);
    let reference_full = predict(&shadow_full, &adj, shadow.graph.attributes().expect("checked"))?
        .posteriors()
        .clone();

    let mut mlp_nodes: Vec<usize> = shadow.train.ids().iter().chain(shadow.val.ids()).copied().collect();
    mlp_nodes.sort_unstable();
    mlp_nodes.dedup();
    let targets: Vec<(usize, usize)> = mlp_nodes
        .iter()
        .map(|&v| shadow_labels[v].map(|c| (v, c)).ok_or(Error::MissingLabel(v)))
        .collect::<Result<_>>()?;
    let inputs = ensemble_inputs(&reference_structural, &reference_full)?;
    let attack_mlp = train_attack_mlp(&inputs, &targets, c, k.params.attack_mlp_hidden, cfg)?;

    let labels = k.query_attackers()?;
    let target_ag = one_hot_graph(full, &k.attacker_nodes, &labels)?;
    let structural = train_surrogate(&target_ag, c, val, cfg)?;

    Ok(EnsembleModel {
        structural,
        shadow_structural,
        shadow_full,
        attack_mlp,
        reference_structural,
        reference_full,
    })
}

impl EnsembleModel {
    /// Index of the reference row nearest to each row of `posteriors`;
    /// ties go to the lower index.
    pub fn match_reference(&self, posteriors: &Array2<f64>, exec: Exec) -> Vec<usize> {
        let refs = &self.reference_structural;
        par::map(exec, posteriors.nrows(), |i| {
            let p = posteriors.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (s, r) in refs.rows().into_iter().enumerate() {
                let d: f64 = p.iter().zip(r.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best = s;
                    best_d = d;
                }
            }
            best
        })
    }

    /// Ensemble prediction for every node of `structure` (attributes unused).
    pub fn predict(&self, structure: &Graph) -> Result<PredictionSet> {
        let n = structure.num_nodes();
        if self.structural.feature_dim() != n {
            return Err(Error::DimensionMismatch {
                what: "one-hot input width vs target nodes",
                expected: self.structural.feature_dim(),
                found: n,
            });
        }
        let p = one_hot_posteriors(&self.structural, structure)?;
        let matched = self.match_reference(&p, Exec::default());
        let paired = self.reference_full.select(Axis(0), &matched);
        self.attack_mlp.predict(&ensemble_inputs(&p, &paired)?)
    }

    pub fn num_classes(&self) -> usize {
        self.attack_mlp.num_classes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mlp_fits_agreeing_one_hot_posteriors() {
        let labels: Vec<usize> = (0..20).map(|i| i % 4).collect();
        let one_hot = Array2::from_shape_fn((20, 4), |(i, c)| if labels[i] == c { 1.0 } else { 0.0 });
        let inputs = ensemble_inputs(&one_hot, &one_hot).unwrap();
        assert_eq!(inputs.cols(), 8);
        let targets: Vec<_> = labels.iter().copied().enumerate().collect();
        let mlp = train_attack_mlp(&inputs, &targets, 4, 32, &TrainConfig::default()).unwrap();
        assert_eq!(mlp.input_dim(), 8);
        let pred = mlp.predict(&inputs).unwrap();
        assert_eq!(pred.hard_labels(), labels.as_slice());
        for s in pred.posteriors().sum_axis(Axis(1)) {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stacking_checks_rows() {
        assert!(ensemble_inputs(&Array2::zeros((2, 3)), &Array2::zeros((3, 3))).is_err());
    }
}
