//! Model extraction attacks against a hard-label GCN oracle.
//!
//! The seven attacks differ in what the attacker knows about the target:
//!
//! | id | attributes | structure        | shadow graph |
//! |----|------------|------------------|--------------|
//! | 0  | partial    | 2-hop of attacker| no           |
//! | 1  | partial    | none             | no           |
//! | 2  | none       | full             | no           |
//! | 3  | none       | none             | yes          |
//! | 4  | partial    | 2-hop of attacker| yes          |
//! | 5  | partial    | none             | yes          |
//! | 6  | none       | full             | yes          |
//!
//! [`AttackKnowledge::observe`] assembles exactly the knowledge one attack is
//! entitled to; [`extract`] rejects knowledge that does not match the row.

mod ensemble;
mod graphs;
mod structure;
mod surrogate;
mod synthesis;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::{GcnModel, Oracle, TrainConfig};
use crate::graph::{Graph, NodeRole, NodeSetView};
use crate::sparse::CsrMatrix;

pub use ensemble::{ensemble_inputs, run_attack6, train_attack_mlp, EnsembleModel};
pub use graphs::{
    build_attack0_graph, build_attack1_graph, build_attack2_graph, build_attack3_graph,
    build_attack4_graph, build_attack5_graph, train_surrogate,
};
pub use structure::{generate_structure, ranked_neighbours};
pub use surrogate::{InputKind, Surrogate};
pub use synthesis::{synthesize_attributes, EmptyHopPolicy, KnownNeighbour};

pub const NUM_ATTACKS: u8 = 7;

/// Which neighbours of the attacker nodes Attack-0 keeps in its graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthesisMode {
    /// Attacker nodes only.
    None,
    /// Attacker nodes plus synthesized 1-hop neighbours.
    FirstOrder,
    /// Attacker nodes plus synthesized 1- and 2-hop neighbours.
    #[default]
    SecondOrder,
}

impl SynthesisMode {
    pub fn max_hop(self) -> usize {
        match self {
            SynthesisMode::None => 0,
            SynthesisMode::FirstOrder => 1,
            SynthesisMode::SecondOrder => 2,
        }
    }
}

impl fmt::Display for SynthesisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthesisMode::None => "none",
            SynthesisMode::FirstOrder => "first-order",
            SynthesisMode::SecondOrder => "second-order",
        })
    }
}

impl FromStr for SynthesisMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SynthesisMode::None),
            "first-order" => Ok(SynthesisMode::FirstOrder),
            "second-order" => Ok(SynthesisMode::SecondOrder),
            other => Err(Error::InvalidConfig(format!(
                "unknown synthesis mode {other:?} (expected none, first-order or second-order)"
            ))),
        }
    }
}

/// Tunables shared by all attacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackParams {
    /// Weight of the 1-hop term in attribute synthesis.
    pub alpha: f64,
    pub synthesis: SynthesisMode,
    pub empty_hop: EmptyHopPolicy,
    pub k_neighbors: usize,
    /// Density target for generated structure when no shadow graph is known.
    pub target_avg_degree: f64,
    /// Share of labeled attack-graph nodes held out for logging.
    pub surrogate_val_fraction: f64,
    /// Hidden width of the ensemble's attack MLP.
    pub attack_mlp_hidden: usize,
}

impl Default for AttackParams {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            synthesis: SynthesisMode::default(),
            empty_hop: EmptyHopPolicy::default(),
            k_neighbors: 3,
            target_avg_degree: 4.0,
            surrogate_val_fraction: 0.1,
            attack_mlp_hidden: 32,
        }
    }
}

impl AttackParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.k_neighbors == 0 {
            return Err(Error::InvalidConfig("k_neighbors must be >= 1".into()));
        }
        if !(self.target_avg_degree > 0.0) {
            return Err(Error::InvalidConfig("target_avg_degree must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.surrogate_val_fraction) {
            return Err(Error::InvalidConfig("surrogate_val_fraction must be in [0, 1)".into()));
        }
        if self.attack_mlp_hidden == 0 {
            return Err(Error::InvalidConfig("attack_mlp_hidden must be >= 1".into()));
        }
        Ok(())
    }
}

/// Public facts about the target domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainInfo {
    pub feature_dim: usize,
    pub num_classes: usize,
}

/// The 2-hop neighbourhood of the attacker nodes, relabelled locally: the
/// first `|V_A|` nodes are the attacker nodes in attacker order, followed by
/// the 1-hop and then the 2-hop neighbours (each in ascending target id).
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub graph: Graph,
    pub hops: Vec<usize>,
}

impl Neighborhood {
    /// What attacker nodes see of `target`: structure only, no attributes or labels.
    pub fn observe(target: &Graph, attackers: &NodeSetView) -> Result<Self> {
        let closure = target.k_hop_closure(attackers, 2)?;
        let mut order: Vec<usize> = attackers.ids().to_vec();
        let mut hops = vec![0; order.len()];
        for hop in 1..=2 {
            let ring = closure.at_hop(hop);
            hops.extend(std::iter::repeat(hop).take(ring.len()));
            order.extend_from_slice(ring.ids());
        }
        let local = target.induce_subgraph(&order)?;
        let graph = Graph::new(local.num_nodes(), local.edges().iter().copied())?
            .with_node_ids(local.node_ids().to_vec())?;
        Ok(Self { graph, hops })
    }

    pub fn num_attackers(&self) -> usize {
        self.hops.iter().take_while(|&&h| h == 0).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KnownStructure {
    Neighborhood(Neighborhood),
    /// The whole target edge set, without attributes or labels.
    Full(Graph),
}

/// A labeled graph from the target's domain, disjoint from the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowKnowledge {
    pub graph: Graph,
    pub train: NodeSetView,
    pub val: NodeSetView,
}

impl ShadowKnowledge {
    /// The shadow graph with labels kept only on its training nodes.
    pub fn training_view(&self) -> Result<Graph> {
        let labels = self
            .graph
            .labels()
            .ok_or(Error::Taxonomy {
                attack: 3,
                missing: "shadow labels",
            })?;
        let mut kept = vec![None; self.graph.num_nodes()];
        for &v in self.train.ids() {
            kept[v] = labels.get(v).copied().flatten();
            if kept[v].is_none() {
                return Err(Error::MissingLabel(v));
            }
        }
        self.graph.clone().with_labels(kept)
    }
}

/// Everything one attacker knows. `known_attrs` rows align with
/// `attacker_nodes`; attacker ids index the oracle's graph.
#[derive(Debug, Clone)]
pub struct AttackKnowledge<'a> {
    pub attacker_nodes: NodeSetView,
    pub known_attrs: Option<CsrMatrix>,
    pub structure: Option<KnownStructure>,
    pub shadow: Option<ShadowKnowledge>,
    pub oracle: &'a Oracle,
    pub domain: DomainInfo,
    pub params: AttackParams,
}

/// Knowledge dimensions each attack requires (and is limited to).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Taxonomy {
    pub attributes: bool,
    pub neighborhood: bool,
    pub full_structure: bool,
    pub shadow: bool,
    pub queries: bool,
}

pub fn taxonomy(attack_id: u8) -> Result<Taxonomy> {
    let t = |attributes, neighborhood, full_structure, shadow, queries| Taxonomy {
        attributes,
        neighborhood,
        full_structure,
        shadow,
        queries,
    };
    Ok(match attack_id {
        0 => t(true, true, false, false, true),
        1 => t(true, false, false, false, true),
        2 => t(false, false, true, false, true),
        3 => t(false, false, false, true, false),
        4 => t(true, true, false, true, true),
        5 => t(true, false, false, true, true),
        6 => t(false, false, true, true, true),
        other => {
            return Err(Error::InvalidConfig(format!(
                "attack id {other} outside 0..{NUM_ATTACKS}"
            )))
        }
    })
}

impl<'a> AttackKnowledge<'a> {
    /// Assembles the knowledge attack `attack_id` is entitled to about
    /// `target` (which must carry attributes), given sampled attacker nodes
    /// and an optional shadow graph.
    pub fn observe(
        attack_id: u8,
        target: &Graph,
        attackers: &NodeSetView,
        shadow: Option<ShadowKnowledge>,
        oracle: &'a Oracle,
        num_classes: usize,
        params: AttackParams,
    ) -> Result<Self> {
        let row = taxonomy(attack_id)?;
        let attrs = target
            .attributes()
            .ok_or_else(|| Error::InvalidConfig("target graph has no attributes".into()))?;
        if row.shadow && shadow.is_none() {
            return Err(Error::Taxonomy {
                attack: attack_id,
                missing: "shadow graph",
            });
        }
        attackers.validate(target)?;
        let attacker_nodes = if row.queries {
            NodeSetView::new(attackers.ids().to_vec(), NodeRole::Attacker)?
        } else {
            NodeSetView::new(Vec::new(), NodeRole::Attacker)?
        };
        let known_attrs = row
            .attributes
            .then(|| attrs.select_rows(attacker_nodes.ids()));
        let structure = if row.neighborhood {
            Some(KnownStructure::Neighborhood(Neighborhood::observe(
                target,
                &attacker_nodes,
            )?))
        } else if row.full_structure {
            Some(KnownStructure::Full(Graph::new(
                target.num_nodes(),
                target.edges().iter().copied(),
            )?))
        } else {
            None
        };
        Ok(Self {
            attacker_nodes,
            known_attrs,
            structure,
            shadow: if row.shadow { shadow } else { None },
            oracle,
            domain: DomainInfo {
                feature_dim: attrs.cols(),
                num_classes,
            },
            params,
        })
    }

    /// Errors unless every knowledge dimension `attack_id` relies on is present.
    pub fn check(&self, attack_id: u8) -> Result<()> {
        let row = taxonomy(attack_id)?;
        let missing = |missing| Err(Error::Taxonomy {
            attack: attack_id,
            missing,
        });
        if row.attributes && self.known_attrs.is_none() {
            return missing("attacker node attributes");
        }
        if row.neighborhood && !matches!(self.structure, Some(KnownStructure::Neighborhood(_))) {
            return missing("2-hop structure around attacker nodes");
        }
        if row.full_structure && !matches!(self.structure, Some(KnownStructure::Full(_))) {
            return missing("full target structure");
        }
        if row.shadow && self.shadow.is_none() {
            return missing("shadow graph");
        }
        if row.queries && self.attacker_nodes.is_empty() {
            return Err(Error::EmptyNodeSet("attacker nodes"));
        }
        if let Some(a) = &self.known_attrs {
            if a.rows() != self.attacker_nodes.len() {
                return Err(Error::DimensionMismatch {
                    what: "known attribute rows vs attacker nodes",
                    expected: self.attacker_nodes.len(),
                    found: a.rows(),
                });
            }
        }
        self.params.validate()
    }

    pub(crate) fn attrs(&self, attack: u8) -> Result<&CsrMatrix> {
        self.known_attrs.as_ref().ok_or(Error::Taxonomy {
            attack,
            missing: "attacker node attributes",
        })
    }

    pub(crate) fn shadow(&self, attack: u8) -> Result<&ShadowKnowledge> {
        let s = self.shadow.as_ref().ok_or(Error::Taxonomy {
            attack,
            missing: "shadow graph",
        })?;
        match s.graph.feature_dim() {
            Some(d) if d == self.domain.feature_dim => Ok(s),
            found => Err(Error::DimensionMismatch {
                what: "shadow feature dimension",
                expected: self.domain.feature_dim,
                found: found.unwrap_or(0),
            }),
        }
    }

    /// One oracle query per attacker node.
    pub(crate) fn query_attackers(&self) -> Result<Vec<usize>> {
        if self.attacker_nodes.is_empty() {
            return Err(Error::EmptyNodeSet("attacker nodes"));
        }
        self.oracle.query(self.attacker_nodes.ids())
    }
}

/// Where an attack-graph node came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Attacker,
    Synthetic,
    Shadow,
}

/// Training graph assembled by an attack. Labels are present exactly on
/// the `labeled` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackGraph {
    pub graph: Graph,
    pub labeled: NodeSetView,
    pub provenance: Vec<Provenance>,
}

impl AttackGraph {
    /// Places `second` after `first` with no connecting edges.
    pub fn disjoint_union(first: &AttackGraph, second: &AttackGraph) -> Result<AttackGraph> {
        let graph = Graph::disjoint_union(&first.graph, &second.graph)?;
        let offset = first.graph.num_nodes();
        let labeled = first
            .labeled
            .ids()
            .iter()
            .copied()
            .chain(second.labeled.ids().iter().map(|&v| v + offset))
            .collect();
        let provenance = first
            .provenance
            .iter()
            .chain(&second.provenance)
            .copied()
            .collect();
        Ok(AttackGraph {
            graph,
            labeled: NodeSetView::new(labeled, NodeRole::Other)?,
            provenance,
        })
    }
}

/// Builds attack `attack_id`'s training data from `knowledge` and trains a
/// surrogate with `cfg` (semi-supervised for 0/2/3/4, supervised for 1/5,
/// an ensemble for 6).
pub fn extract(attack_id: u8, knowledge: &AttackKnowledge<'_>, cfg: &TrainConfig) -> Result<Surrogate> {
    knowledge.check(attack_id)?;
    let n_classes = knowledge.domain.num_classes;
    let gcn = |ag: AttackGraph, input: InputKind| -> Result<Surrogate> {
        let model: GcnModel = train_surrogate(&ag, n_classes, knowledge.params.surrogate_val_fraction, cfg)?;
        Ok(Surrogate::Gcn { model, input })
    };
    match attack_id {
        0 => gcn(build_attack0_graph(knowledge)?, InputKind::Attributes),
        1 => gcn(build_attack1_graph(knowledge)?, InputKind::Attributes),
        2 => gcn(build_attack2_graph(knowledge)?, InputKind::OneHot),
        3 => gcn(build_attack3_graph(knowledge)?, InputKind::Attributes),
        4 => gcn(build_attack4_graph(knowledge)?, InputKind::Attributes),
        5 => gcn(build_attack5_graph(knowledge)?, InputKind::Attributes),
        6 => Ok(Surrogate::Ensemble(Box::new(run_attack6(knowledge, cfg)?))),
        other => Err(Error::InvalidConfig(format!("attack id {other} outside 0..{NUM_ATTACKS}"))),
    }
}
