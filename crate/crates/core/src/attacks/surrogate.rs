use serde::{Deserialize, Serialize};

use super::EnsembleModel;
use crate::adjacency::normalize_adjacency;
use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::gcn::{predict, GcnModel, Mlp, PredictionSet};
use crate::graph::Graph;
use crate::sparse::CsrMatrix;

/// What a surrogate GCN consumes as node attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// The target graph's real attributes.
    Attributes,
    /// The identity matrix over target nodes.
    OneHot,
}

/// An extracted model, ready to label nodes of the target graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Surrogate {
    Gcn { model: GcnModel, input: InputKind },
    Ensemble(Box<EnsembleModel>),
}

impl Surrogate {
    /// Predictions for every node of `target`.
    pub fn predict(&self, target: &Graph) -> Result<PredictionSet> {
        match self {
            Surrogate::Gcn { model, input } => {
                let adj = normalize_adjacency(target);
                match input {
                    InputKind::Attributes => {
                        let attrs = target.attributes().ok_or_else(|| {
                            Error::InvalidConfig("target graph has no attributes".into())
                        })?;
                        predict(model, &adj, attrs)
                    }
                    InputKind::OneHot => {
                        predict(model, &adj, &CsrMatrix::identity(target.num_nodes()))
                    }
                }
            }
            Surrogate::Ensemble(e) => e.predict(target),
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            Surrogate::Gcn { model, .. } => model.num_classes(),
            Surrogate::Ensemble(e) => e.num_classes(),
        }
    }

    pub fn to_checkpoint(&self, meta: serde_json::Value) -> Checkpoint {
        match self {
            Surrogate::Gcn { model, input } => {
                let mut ck = Checkpoint::new(
                    "surrogate-gcn",
                    serde_json::json!({ "input": input, "meta": meta }),
                );
                model.push_into(&mut ck, "");
                ck
            }
            Surrogate::Ensemble(e) => {
                let mut ck = Checkpoint::new("surrogate-ensemble", serde_json::json!({ "meta": meta }));
                e.structural.push_into(&mut ck, "structural.");
                e.shadow_structural.push_into(&mut ck, "shadow_structural.");
                e.shadow_full.push_into(&mut ck, "shadow_full.");
                e.attack_mlp.push_into(&mut ck, "mlp.");
                ck.push("reference_structural", e.reference_structural.clone());
                ck.push("reference_full", e.reference_full.clone());
                ck
            }
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        match ck.kind.as_str() {
            "surrogate-gcn" => Ok(Surrogate::Gcn {
                model: GcnModel::pull_from(ck, "")?,
                input: serde_json::from_value(ck.meta["input"].clone())?,
            }),
            "surrogate-ensemble" => Ok(Surrogate::Ensemble(Box::new(EnsembleModel {
                structural: GcnModel::pull_from(ck, "structural.")?,
                shadow_structural: GcnModel::pull_from(ck, "shadow_structural.")?,
                shadow_full: GcnModel::pull_from(ck, "shadow_full.")?,
                attack_mlp: Mlp::pull_from(ck, "mlp.")?,
                reference_structural: ck.tensor("reference_structural")?.clone(),
                reference_full: ck.tensor("reference_full")?.clone(),
            }))),
            other => Err(Error::Checkpoint(format!("not a surrogate checkpoint: {other}"))),
        }
    }
}
