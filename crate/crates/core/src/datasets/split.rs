use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DatasetBundle;
use crate::community::greedy_modularity_communities;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeRole, NodeSetView};
use crate::rng;

/// Train/validation/test node sets; pairwise disjoint and ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: NodeSetView,
    pub val: NodeSetView,
    pub test: NodeSetView,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_count: usize,
    pub val_count: usize,
    pub test_count: usize,
}

impl SplitSpec {
    /// Standard counts for the citation benchmarks, matched on the name
    /// prefix. Other datasets get 20 training nodes per class and Cora's
    /// validation and test proportions.
    pub fn for_dataset(name: &str, num_nodes: usize, num_classes: usize) -> Self {
        let lower = name.to_ascii_lowercase();
        let spec = |train_count, val_count, test_count| SplitSpec {
            train_count,
            val_count,
            test_count,
        };
        if lower.starts_with("cora") {
            spec(140, 300, 1000)
        } else if lower.starts_with("citeseer") {
            spec(120, 500, 1000)
        } else if lower.starts_with("pubmed") {
            spec(60, 500, 1000)
        } else {
            spec(
                (20 * num_classes).min(num_nodes / 4),
                num_nodes * 300 / 2708,
                num_nodes * 1000 / 2708,
            )
        }
    }

    /// Every count multiplied by `factor` and rounded down; training keeps
    /// at least one node per class when the scaled total allows it.
    pub fn scaled(&self, factor: f64, num_classes: usize, num_nodes: usize) -> Self {
        let scale = |c: usize| (c as f64 * factor).floor() as usize;
        let mut train_count = scale(self.train_count);
        if train_count < num_classes && num_classes <= num_nodes {
            train_count = num_classes;
        }
        SplitSpec {
            train_count,
            val_count: scale(self.val_count),
            test_count: scale(self.test_count),
        }
    }
}

/// Class-stratified training set (equal share per class, remainder to the
/// lowest class ids, shortfalls topped up at random), then random
/// validation and test sets from the remaining labeled nodes.
pub fn make_full_split(g: &Graph, num_classes: usize, spec: &SplitSpec, seed: u64) -> Result<Split> {
    let labels = g
        .labels()
        .ok_or_else(|| Error::InvalidConfig("graph has no labels to split".into()))?;
    let mut labeled: Vec<usize> = (0..g.num_nodes()).filter(|&v| labels[v].is_some()).collect();
    let total = spec.train_count + spec.val_count + spec.test_count;
    if total > labeled.len() {
        return Err(Error::InvalidConfig(format!(
            "split needs {total} labeled nodes but only {} exist",
            labeled.len()
        )));
    }
    if num_classes == 0 {
        return Err(Error::InvalidConfig("num_classes must be >= 1".into()));
    }
    labeled.shuffle(&mut rng::stream(seed, rng::STREAM_SPLIT));

    let mut quota: Vec<usize> = (0..num_classes)
        .map(|c| spec.train_count / num_classes + usize::from(c < spec.train_count % num_classes))
        .collect();
    let mut train = Vec::with_capacity(spec.train_count);
    let mut rest = Vec::with_capacity(labeled.len());
    for v in labeled {
        let c = labels[v].expect("filtered");
        match quota.get_mut(c) {
            Some(q) if *q > 0 => {
                *q -= 1;
                train.push(v);
            }
            _ => rest.push(v),
        }
    }
    let shortfall = spec.train_count - train.len();
    let mut rest = rest.into_iter();
    train.extend(rest.by_ref().take(shortfall));
    let mut val: Vec<usize> = rest.by_ref().take(spec.val_count).collect();
    let mut test: Vec<usize> = rest.take(spec.test_count).collect();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train: NodeSetView::new(train, NodeRole::Other)?,
        val: NodeSetView::new(val, NodeRole::Other)?,
        test: NodeSetView::new(test, NodeRole::Other)?,
    })
}

/// `⌊fraction · num_nodes⌋` distinct nodes drawn uniformly, ascending.
pub fn sample_attacker_nodes(num_nodes: usize, fraction: f64, seed: u64) -> Result<NodeSetView> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "attacker fraction {fraction} outside (0, 1]"
        )));
    }
    let count = (fraction * num_nodes as f64).floor() as usize;
    let mut r = rng::stream(seed, rng::STREAM_ATTACKER_SAMPLE);
    let mut ids = rand::seq::index::sample(&mut r, num_nodes, count).into_vec();
    ids.sort_unstable();
    NodeSetView::new(ids, NodeRole::Attacker)
}

fn sub_bundle(
    parent: &DatasetBundle,
    nodes: &[usize],
    suffix: &str,
    base: &SplitSpec,
    seed: u64,
) -> Result<DatasetBundle> {
    let graph = parent.graph.induce_subgraph(nodes)?;
    let factor = nodes.len() as f64 / parent.graph.num_nodes() as f64;
    let spec = base.scaled(factor, parent.num_classes, nodes.len());
    let split = make_full_split(&graph, parent.num_classes, &spec, seed)?;
    let mut b = DatasetBundle::new(format!("{}-{suffix}", parent.name), graph, parent.num_classes);
    b.split = Some(split);
    Ok(b)
}

/// Splits `bundle` into disjoint target and shadow bundles along greedy
/// modularity communities. Communities go to the target side, largest first
/// (ties by lowest member id), until it holds at least
/// `target_fraction · N` nodes; the rest form the shadow side. Edges between
/// the sides are dropped and each side gets its own proportionally scaled
/// split.
pub fn make_shadow_split(
    bundle: &DatasetBundle,
    target_fraction: f64,
    seed: u64,
) -> Result<(DatasetBundle, DatasetBundle)> {
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target fraction {target_fraction} outside (0, 1)"
        )));
    }
    let g = &bundle.graph;
    let n = g.num_nodes();
    let mut communities = greedy_modularity_communities(g)?;
    let limit = (target_fraction.max(1.0 - target_fraction) * n as f64).floor() as usize;
    if let Some(big) = communities.iter().find(|c| c.len() > limit) {
        return Err(Error::Unsplittable {
            size: big.len(),
            limit,
            total: n,
        });
    }
    communities.sort_by_key(|c| (std::cmp::Reverse(c.len()), c.ids().iter().min().copied()));
    let want = target_fraction * n as f64;
    let (mut target, mut shadow) = (Vec::new(), Vec::new());
    for c in &communities {
        if (target.len() as f64) < want {
            target.extend_from_slice(c.ids());
        } else {
            shadow.extend_from_slice(c.ids());
        }
    }
    if shadow.is_empty() {
        return Err(Error::Unsplittable {
            size: target.len(),
            limit,
            total: n,
        });
    }
    target.sort_unstable();
    shadow.sort_unstable();
    let base = SplitSpec::for_dataset(&bundle.name, n, bundle.num_classes);
    Ok((
        sub_bundle(bundle, &target, "target", &base, rng::derive_seed(seed, 1))?,
        sub_bundle(bundle, &shadow, "shadow", &base, rng::derive_seed(seed, 2))?,
    ))
}

/// Breadth-first sample of `count` nodes from random start nodes, re-split
/// with counts scaled to the sample size. Used to shrink a shadow graph
/// while keeping its local structure.
pub fn snowball_subsample(bundle: &DatasetBundle, count: usize, seed: u64) -> Result<DatasetBundle> {
    let g = &bundle.graph;
    let n = g.num_nodes();
    if count == 0 || count > n {
        return Err(Error::InvalidConfig(format!(
            "cannot sample {count} of {n} nodes"
        )));
    }
    let mut r = rng::stream(seed, rng::STREAM_SHADOW_SUBSAMPLE);
    let mut taken = vec![false; n];
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let unvisited: Vec<usize> = (0..n).filter(|&v| !taken[v]).collect();
        let start = unvisited[r.random_range(0..unvisited.len())];
        let mut queue = VecDeque::from([start]);
        taken[start] = true;
        while let Some(u) = queue.pop_front() {
            picked.push(u);
            if picked.len() == count {
                break;
            }
            for &v in g.neighbors(u) {
                if !taken[v] {
                    taken[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    picked.sort_unstable();
    let base = match &bundle.split {
        Some(s) => SplitSpec {
            train_count: s.train.len(),
            val_count: s.val.len(),
            test_count: s.test.len(),
        },
        None => SplitSpec::for_dataset(&bundle.name, n, bundle.num_classes),
    };
    let graph = g.induce_subgraph(&picked)?;
    let spec = base.scaled(count as f64 / n as f64, bundle.num_classes, count);
    let split = make_full_split(&graph, bundle.num_classes, &spec, rng::derive_seed(seed, 3))?;
    let mut b = DatasetBundle::new(bundle.name.clone(), graph, bundle.num_classes);
    b.split = Some(split);
    Ok(b)
}
