use rand::seq::SliceRandom;

use super::structure::generate_structure;
use super::synthesis::{synthesize_attributes, KnownNeighbour};
use super::{AttackGraph, AttackKnowledge, KnownStructure, Provenance};
use crate::adjacency::normalize_adjacency;
use crate::error::{Error, Result};
use crate::gcn::{train_on, GcnModel, TrainConfig, TrainingData};
use crate::graph::{Graph, NodeRole, NodeSetView};
use crate::par::Exec;
use crate::rng;
use crate::sparse::CsrMatrix;

/// Attacker nodes with their true attributes and oracle labels, plus their
/// 1-hop (and optionally 2-hop) neighbours with synthesized attributes.
/// Neighbours with no attacker node within two hops get a zero row.
pub fn build_attack0_graph(k: &AttackKnowledge<'_>) -> Result<AttackGraph> {
    let attrs = k.attrs(0)?;
    let nb = match &k.structure {
        Some(KnownStructure::Neighborhood(nb)) => nb,
        _ => {
            return Err(Error::Taxonomy {
                attack: 0,
                missing: "2-hop structure around attacker nodes",
            })
        }
    };
    let q = k.attacker_nodes.len();
    if q == 0 {
        return Err(Error::EmptyNodeSet("attacker nodes"));
    }
    if nb.num_attackers() != q {
        return Err(Error::DimensionMismatch {
            what: "neighbourhood attacker prefix",
            expected: q,
            found: nb.num_attackers(),
        });
    }
    let labels = k.query_attackers()?;
    let g = &nb.graph;
    let max_hop = k.params.synthesis.max_hop();
    let kept = nb.hops.iter().take_while(|&&h| h <= max_hop).count();
    let dim = k.domain.feature_dim;

    let known = |j: usize| {
        let (indices, values) = attrs.row(j);
        KnownNeighbour {
            indices,
            values,
            degree: g.degree(j),
        }
    };
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(kept);
    for i in 0..q {
        let (c, v) = attrs.row(i);
        rows.push(c.iter().copied().zip(v.iter().copied()).collect());
    }
    let mut stamp = vec![usize::MAX; g.num_nodes()];
    for i in q..kept {
        stamp[i] = i;
        let mut one = Vec::new();
        for &j in g.neighbors(i) {
            stamp[j] = i;
            if j < q {
                one.push(known(j));
            }
        }
        let mut two_ids = Vec::new();
        for &j in g.neighbors(i) {
            for &l in g.neighbors(j) {
                if stamp[l] != i {
                    stamp[l] = i;
                    if l < q {
                        two_ids.push(l);
                    }
                }
            }
        }
        two_ids.sort_unstable();
        let two: Vec<_> = two_ids.into_iter().map(known).collect();
        match synthesize_attributes(i, &one, &two, k.params.alpha, k.params.empty_hop, dim) {
            Ok(row) => rows.push(row),
            Err(Error::NoKnownNeighbour(_)) => rows.push(Vec::new()),
            Err(e) => return Err(e),
        }
    }

    let local = g.induce_subgraph(&(0..kept).collect::<Vec<_>>())?;
    let mut node_labels = vec![None; kept];
    for (i, &c) in labels.iter().enumerate() {
        node_labels[i] = Some(c);
    }
    let graph = local
        .with_attributes(CsrMatrix::from_sparse_rows(dim, rows))?
        .with_labels(node_labels)?;
    let provenance = (0..kept)
        .map(|i| if i < q { Provenance::Attacker } else { Provenance::Synthetic })
        .collect();
    Ok(AttackGraph {
        graph,
        labeled: NodeSetView::new((0..q).collect(), NodeRole::Attacker)?,
        provenance,
    })
}

fn attack1_with_degree(k: &AttackKnowledge<'_>, attack: u8, avg_degree: f64) -> Result<AttackGraph> {
    let attrs = k.attrs(attack)?;
    let q = k.attacker_nodes.len();
    if q < 2 {
        return Err(Error::InvalidConfig(format!(
            "attack-{attack} needs at least 2 attacker nodes, got {q}"
        )));
    }
    let labels = k.query_attackers()?;
    let edges = generate_structure(attrs, avg_degree, k.params.k_neighbors, Exec::default())?;
    let graph = Graph::new(q, edges)?
        .with_attributes(attrs.clone())?
        .with_labels(labels.into_iter().map(Some).collect())?;
    Ok(AttackGraph {
        graph,
        labeled: NodeSetView::new((0..q).collect(), NodeRole::Attacker)?,
        provenance: vec![Provenance::Attacker; q],
    })
}

/// Attacker nodes only, connected by generated structure at the configured
/// density; every node carries an oracle label.
pub fn build_attack1_graph(k: &AttackKnowledge<'_>) -> Result<AttackGraph> {
    attack1_with_degree(k, 1, k.params.target_avg_degree)
}

/// The full target structure with identity attributes; attacker nodes carry
/// oracle labels.
pub fn build_attack2_graph(k: &AttackKnowledge<'_>) -> Result<AttackGraph> {
    let full = match &k.structure {
        Some(KnownStructure::Full(g)) => g,
        _ => {
            return Err(Error::Taxonomy {
                attack: 2,
                missing: "full target structure",
            })
        }
    };
    one_hot_graph(full, &k.attacker_nodes, &k.query_attackers()?)
}

pub(crate) fn one_hot_graph(
    structure: &Graph,
    labeled: &NodeSetView,
    labels: &[usize],
) -> Result<AttackGraph> {
    let n = structure.num_nodes();
    let mut node_labels = vec![None; n];
    let mut provenance = vec![Provenance::Synthetic; n];
    for (&v, &c) in labeled.ids().iter().zip(labels) {
        node_labels[v] = Some(c);
        provenance[v] = Provenance::Attacker;
    }
    let graph = Graph::new(n, structure.edges().iter().copied())?
        .with_attributes(CsrMatrix::identity(n))?
        .with_labels(node_labels)?;
    Ok(AttackGraph {
        graph,
        labeled: NodeSetView::new(labeled.ids().to_vec(), NodeRole::Attacker)?,
        provenance,
    })
}

/// The shadow graph as is, labeled on its training nodes. Makes no queries.
pub fn build_attack3_graph(k: &AttackKnowledge<'_>) -> Result<AttackGraph> {
    let s = k.shadow(3)?;
    Ok(AttackGraph {
        graph: s.training_view()?,
        labeled: NodeSetView::new(s.train.ids().to_vec(), NodeRole::Shadow)?,
        provenance: vec![Provenance::Shadow; s.graph.num_nodes()],
    })
}

/// Attack-0's graph and the shadow graph side by side, unconnected.
pub fn build_attack4_graph(k: &AttackKnowledge<'_>) -> Result<AttackGraph> {
    k.shadow(4)?;
    let a0 = build_attack0_graph(k)?;
    AttackGraph::disjoint_union(&a0, &build_attack3_graph(k)?)
}

/// Attack-1's graph (at the shadow graph's density) and the shadow graph
/// side by side, unconnected.
pub fn build_attack5_graph(k: &AttackKnowledge<'_>) -> Result<AttackGraph> {
    let shadow = k.shadow(5)?;
    let degree = shadow.graph.average_degree();
    let degree = if degree > 0.0 { degree } else { k.params.target_avg_degree };
    let a1 = attack1_with_degree(k, 5, degree)?;
    AttackGraph::disjoint_union(&a1, &build_attack3_graph(k)?)
}

/// Trains a fresh GCN on an attack graph. A `val_fraction` share of the
/// labeled nodes is held out and only used for logging.
pub fn train_surrogate(
    ag: &AttackGraph,
    num_classes: usize,
    val_fraction: f64,
    cfg: &TrainConfig,
) -> Result<GcnModel> {
    let attrs = ag
        .graph
        .attributes()
        .ok_or_else(|| Error::InvalidConfig("attack graph has no attributes".into()))?;
    let labels = ag
        .graph
        .labels()
        .ok_or_else(|| Error::InvalidConfig("attack graph has no labels".into()))?;
    let mut ids = ag.labeled.ids().to_vec();
    ids.shuffle(&mut rng::stream(cfg.seed, rng::STREAM_SURROGATE_VAL));
    let n_val = ((ids.len() as f64 * val_fraction).floor() as usize).min(ids.len().saturating_sub(1));
    let mut val = ids.split_off(ids.len() - n_val);
    ids.sort_unstable();
    val.sort_unstable();
    let adj = normalize_adjacency(&ag.graph);
    let data = TrainingData {
        adj: &adj,
        attrs,
        labels,
    };
    let (model, hist) = train_on(
        data,
        &NodeSetView::new(ids, NodeRole::Other)?,
        &NodeSetView::new(val, NodeRole::Other)?,
        num_classes,
        cfg,
    )?;
    if let (Some(loss), Some(acc)) = (hist.loss.last(), hist.val_accuracy.last()) {
        log::debug!("surrogate final loss {loss:.4}, held-out accuracy {acc:?}");
    }
    Ok(model)
}
