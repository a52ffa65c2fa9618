//! Citation-like random graphs for tests, fixtures and benchmarks.
//!
//! Classes are drawn uniformly. Each class owns a block of "topic" words;
//! a node's bag of words mixes its class block with words drawn from the
//! whole vocabulary. Edges join nodes of the same class with probability
//! `homophily` and uniformly random pairs otherwise. Endpoints are drawn
//! with Pareto-distributed activity weights so the degree distribution is
//! skewed like a citation graph's.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DatasetBundle;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    pub num_nodes: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub avg_degree: f64,
    pub homophily: f64,
    pub words_per_node: usize,
    /// Probability that a word comes from the node's class block.
    pub topic_share: f64,
}

impl SyntheticSpec {
    /// Proportions loosely modelled on Cora (7 classes, degree about 4).
    pub fn cora_like(num_nodes: usize) -> Self {
        Self {
            name: "synth-cora".into(),
            num_nodes,
            num_classes: 7,
            feature_dim: 200,
            avg_degree: 4.0,
            homophily: 0.8,
            words_per_node: 12,
            topic_share: 0.25,
        }
    }

    /// Six classes and a sparser graph, like Citeseer.
    pub fn citeseer_like(num_nodes: usize) -> Self {
        Self {
            name: "synth-citeseer".into(),
            num_nodes,
            num_classes: 6,
            feature_dim: 240,
            avg_degree: 2.8,
            homophily: 0.74,
            words_per_node: 14,
            topic_share: 0.25,
        }
    }

    /// Three classes with dense word vectors, like Pubmed.
    pub fn pubmed_like(num_nodes: usize) -> Self {
        Self {
            name: "synth-pubmed".into(),
            num_nodes,
            num_classes: 3,
            feature_dim: 100,
            avg_degree: 4.5,
            homophily: 0.8,
            words_per_node: 20,
            topic_share: 0.2,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("synthetic spec: {m}")));
        if self.num_nodes < 2 || self.num_classes == 0 {
            return bad("need at least 2 nodes and 1 class");
        }
        if self.feature_dim < self.num_classes || self.words_per_node == 0 {
            return bad("need at least one word per class and per node");
        }
        if self.words_per_node > self.feature_dim / self.num_classes {
            return bad("words_per_node exceeds a class block");
        }
        if !(0.0..=1.0).contains(&self.homophily) || !(0.0..=1.0).contains(&self.topic_share) {
            return bad("probabilities must lie in [0, 1]");
        }
        let max_edges = self.num_nodes * (self.num_nodes - 1) / 2;
        if !(self.avg_degree >= 0.0) || self.avg_degree * self.num_nodes as f64 / 2.0 > max_edges as f64 / 2.0 {
            return bad("avg_degree must be >= 0 and leave the graph at most half dense");
        }
        Ok(())
    }
}

fn weighted_pick<R: Rng>(cumulative: &[f64], r: &mut R) -> usize {
    let total = *cumulative.last().expect("nonempty");
    let x = r.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1)
}

/// Deterministic for a given `(spec, seed)`.
pub fn generate_citation_like(spec: &SyntheticSpec, seed: u64) -> Result<DatasetBundle> {
    spec.validate()?;
    let mut r = rng::stream(seed, rng::STREAM_SYNTHETIC);
    let n = spec.num_nodes;
    let c = spec.num_classes;
    let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..c)).collect();
    let activity: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = r.random();
            (1.0 - u).powf(-1.0 / 2.5)
        })
        .collect();

    let cumulative = |nodes: &[usize]| -> Vec<f64> {
        let mut acc = 0.0;
        nodes
            .iter()
            .map(|&v| {
                acc += activity[v];
                acc
            })
            .collect()
    };
    let all: Vec<usize> = (0..n).collect();
    let all_cum = cumulative(&all);
    let by_class: Vec<Vec<usize>> = (0..c)
        .map(|k| (0..n).filter(|&v| labels[v] == k).collect())
        .collect();
    let class_cum: Vec<Vec<f64>> = by_class.iter().map(|m| cumulative(m)).collect();

    let target_edges = (spec.avg_degree * n as f64 / 2.0).round() as usize;
    let mut edges = HashSet::with_capacity(target_edges);
    while edges.len() < target_edges {
        let u = all[weighted_pick(&all_cum, &mut r)];
        let same = r.random::<f64>() < spec.homophily;
        let v = if same && by_class[labels[u]].len() > 1 {
            let k = labels[u];
            by_class[k][weighted_pick(&class_cum[k], &mut r)]
        } else {
            all[weighted_pick(&all_cum, &mut r)]
        };
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();

    let block = spec.feature_dim / c;
    let mut triplets = Vec::with_capacity(n * spec.words_per_node);
    for (v, &k) in labels.iter().enumerate() {
        let mut words = HashSet::with_capacity(spec.words_per_node);
        while words.len() < spec.words_per_node {
            let w = if r.random::<f64>() < spec.topic_share {
                k * block + r.random_range(0..block)
            } else {
                r.random_range(0..spec.feature_dim)
            };
            words.insert(w);
        }
        let mut words: Vec<usize> = words.into_iter().collect();
        words.sort_unstable();
        triplets.extend(words.into_iter().map(|w| (v, w, 1.0)));
    }
    let attrs = CsrMatrix::from_triplets(n, spec.feature_dim, &triplets)?;
    let graph = Graph::new(n, edges)?
        .with_attributes(attrs)?
        .with_labels(labels.into_iter().map(Some).collect())?;
    let mut bundle = DatasetBundle::new(spec.name.clone(), graph, c);
    bundle.extra.insert("generator".into(), serde_json::to_value(spec)?);
    bundle.extra.insert("generator_seed".into(), seed.into());
    Ok(bundle)
}
