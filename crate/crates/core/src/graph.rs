//! Undirected attributed graphs and node-set views.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Undirected simple graph with optional attributes and labels.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted and deduplicated.
/// Self-loops are dropped at construction; normalization adds them back.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    attributes: Option<CsrMatrix>,
    labels: Option<Vec<Option<usize>>>,
    node_ids: Vec<u64>,
}

impl Graph {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::EdgeOutOfRange { u, v, num_nodes });
            }
            if u != v {
                canon.push((u.min(v), u.max(v)));
            }
        }
        canon.sort_unstable();
        canon.dedup();
        let mut neighbors = vec![Vec::new(); num_nodes];
        for &(u, v) in &canon {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            num_nodes,
            edges: canon,
            neighbors,
            attributes: None,
            labels: None,
            node_ids: (0..num_nodes as u64).collect(),
        })
    }

    pub fn with_attributes(mut self, attributes: CsrMatrix) -> Result<Self> {
        if attributes.rows() != self.num_nodes {
            return Err(Error::DimensionMismatch {
                what: "attribute rows",
                expected: self.num_nodes,
                found: attributes.rows(),
            });
        }
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<Option<usize>>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(Error::DimensionMismatch {
                what: "label count",
                expected: self.num_nodes,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_node_ids(mut self, node_ids: Vec<u64>) -> Result<Self> {
        if node_ids.len() != self.num_nodes {
            return Err(Error::DimensionMismatch {
                what: "node id count",
                expected: self.num_nodes,
                found: node_ids.len(),
            });
        }
        self.node_ids = node_ids;
        Ok(self)
    }

    pub fn without_attributes(&self) -> Self {
        Self {
            attributes: None,
            ..self.clone()
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn average_degree(&self) -> f64 {
        if self.num_nodes == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.num_nodes as f64
        }
    }

    pub fn attributes(&self) -> Option<&CsrMatrix> {
        self.attributes.as_ref()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.attributes.as_ref().map(CsrMatrix::cols)
    }

    pub fn labels(&self) -> Option<&[Option<usize>]> {
        self.labels.as_deref()
    }

    pub fn label(&self, node: usize) -> Option<usize> {
        self.labels.as_ref().and_then(|l| l[node])
    }

    /// One past the largest label present, or 0 when unlabeled.
    pub fn num_label_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().flatten().max().map(|m| m + 1))
            .unwrap_or(0)
    }

    pub fn node_ids(&self) -> &[u64] {
        &self.node_ids
    }

    pub fn contains(&self, node: usize) -> bool {
        node < self.num_nodes
    }

    /// All nodes within graph distance `k` of any seed, each tagged with its
    /// minimum hop distance, plus every edge with both endpoints in that set.
    pub fn k_hop_closure(&self, seeds: &NodeSetView, k: usize) -> Result<KHopClosure> {
        seeds.validate(self)?;
        let mut hop = vec![usize::MAX; self.num_nodes];
        let mut queue = VecDeque::new();
        for &s in seeds.ids() {
            hop[s] = 0;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            if hop[u] == k {
                continue;
            }
            for &v in &self.neighbors[u] {
                if hop[v] == usize::MAX {
                    hop[v] = hop[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let nodes: Vec<usize> = (0..self.num_nodes).filter(|&v| hop[v] <= k).collect();
        let hops = nodes.iter().map(|&v| hop[v]).collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| hop[u] <= k && hop[v] <= k)
            .collect();
        Ok(KHopClosure { nodes, hops, edges })
    }

    /// Subgraph over `nodes` (in the given order) with contiguous ids; the
    /// stable `node_ids` of the parent are carried over.
    pub fn induce_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let mut new_index = vec![usize::MAX; self.num_nodes];
        for (i, &v) in nodes.iter().enumerate() {
            if v >= self.num_nodes {
                return Err(Error::UnknownNode {
                    id: v,
                    num_nodes: self.num_nodes,
                });
            }
            if new_index[v] != usize::MAX {
                return Err(Error::DuplicateNode(v));
            }
            new_index[v] = i;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                let (a, b) = (new_index[u], new_index[v]);
                (a != usize::MAX && b != usize::MAX).then_some((a, b))
            })
            .collect();
        let mut g = Graph::new(nodes.len(), edges)?;
        g.node_ids = nodes.iter().map(|&v| self.node_ids[v]).collect();
        if let Some(attrs) = &self.attributes {
            g.attributes = Some(attrs.select_rows(nodes));
        }
        if let Some(labels) = &self.labels {
            g.labels = Some(nodes.iter().map(|&v| labels[v]).collect());
        }
        Ok(g)
    }

    /// Places `second` after `first` with no edges between the two parts.
    pub fn disjoint_union(first: &Graph, second: &Graph) -> Result<Graph> {
        let n1 = first.num_nodes;
        let attributes = match (&first.attributes, &second.attributes) {
            (Some(a), Some(b)) => Some(a.vstack(b)?),
            (None, None) => None,
            (Some(a), None) => {
                return Err(Error::DimensionMismatch {
                    what: "feature dimension",
                    expected: a.cols(),
                    found: 0,
                })
            }
            (None, Some(b)) => {
                return Err(Error::DimensionMismatch {
                    what: "feature dimension",
                    expected: 0,
                    found: b.cols(),
                })
            }
        };
        let labels = match (&first.labels, &second.labels) {
            (None, None) => None,
            (a, b) => {
                let mut all = a.clone().unwrap_or_else(|| vec![None; n1]);
                all.extend(b.clone().unwrap_or_else(|| vec![None; second.num_nodes]));
                Some(all)
            }
        };
        let edges = first
            .edges
            .iter()
            .copied()
            .chain(second.edges.iter().map(|&(u, v)| (u + n1, v + n1)));
        let mut g = Graph::new(n1 + second.num_nodes, edges)?;
        g.node_ids = first
            .node_ids
            .iter()
            .chain(&second.node_ids)
            .copied()
            .collect();
        g.attributes = attributes;
        g.labels = labels;
        Ok(g)
    }

    /// Connected component index per node, numbered in order of lowest member.
    pub fn connected_components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.num_nodes];
        let mut next = 0;
        for start in 0..self.num_nodes {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &self.neighbors[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Map degree → number of nodes with that degree.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for v in 0..self.num_nodes {
            *hist.entry(self.degree(v)).or_insert(0) += 1;
        }
        hist
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    Attacker,
    Neighbor1Hop,
    Neighbor2Hop,
    Shadow,
    Other,
}

/// An ordered set of unique node ids tagged with the role they play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSetView {
    ids: Vec<usize>,
    role: NodeRole,
}

impl NodeSetView {
    pub fn new(ids: Vec<usize>, role: NodeRole) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        for &id in &ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateNode(id));
            }
        }
        Ok(Self { ids, role })
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn role(&self) -> NodeRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        match self.ids.iter().find(|&&id| id >= g.num_nodes()) {
            Some(&id) => Err(Error::UnknownNode {
                id,
                num_nodes: g.num_nodes(),
            }),
            None => Ok(()),
        }
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &id in &self.ids {
            m[id] = true;
        }
        m
    }
}

/// Result of [`Graph::k_hop_closure`]; ids refer to the source graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KHopClosure {
    /// Ascending node ids.
    pub nodes: Vec<usize>,
    /// Minimum hop distance to the seed set, aligned with `nodes`; seeds are 0.
    pub hops: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl KHopClosure {
    pub fn at_hop(&self, hop: usize) -> NodeSetView {
        let role = match hop {
            0 => NodeRole::Attacker,
            1 => NodeRole::Neighbor1Hop,
            2 => NodeRole::Neighbor2Hop,
            _ => NodeRole::Other,
        };
        let ids = self
            .nodes
            .iter()
            .zip(&self.hops)
            .filter(|(_, &h)| h == hop)
            .map(|(&v, _)| v)
            .collect();
        NodeSetView { ids, role }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn construction_canonicalizes_edges() {
        let g = Graph::new(3, [(1, 0), (0, 1), (2, 2), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(matches!(
            Graph::new(2, [(0, 2)]),
            Err(Error::EdgeOutOfRange { .. })
        ));
    }

    #[test]
    fn attribute_and_label_lengths_checked() {
        let g = path3();
        assert!(g.clone().with_attributes(CsrMatrix::zeros(2, 4)).is_err());
        assert!(g.clone().with_labels(vec![Some(0); 4]).is_err());
        assert!(g.with_labels(vec![Some(0), None, Some(2)]).is_ok());
    }

    #[test]
    fn star_center_one_hop_is_everything() {
        let g = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let seeds = NodeSetView::new(vec![0], NodeRole::Attacker).unwrap();
        let c = g.k_hop_closure(&seeds, 1).unwrap();
        assert_eq!(c.nodes, vec![0, 1, 2, 3, 4]);
        assert_eq!(c.edges.len(), 4);
    }

    #[test]
    fn path_two_hops_tags_distances() {
        let g = path3();
        let seeds = NodeSetView::new(vec![0], NodeRole::Attacker).unwrap();
        let c = g.k_hop_closure(&seeds, 2).unwrap();
        assert_eq!(c.nodes, vec![0, 1, 2]);
        assert_eq!(c.hops, vec![0, 1, 2]);
        assert_eq!(c.at_hop(2).ids(), &[2]);
        let c1 = g.k_hop_closure(&seeds, 1).unwrap();
        assert_eq!(c1.nodes, vec![0, 1]);
        assert_eq!(c1.edges, vec![(0, 1)]);
    }

    #[test]
    fn isolated_seed_closure() {
        let g = Graph::new(3, [(1, 2)]).unwrap();
        let seeds = NodeSetView::new(vec![0], NodeRole::Attacker).unwrap();
        let c = g.k_hop_closure(&seeds, 2).unwrap();
        assert_eq!(c.nodes, vec![0]);
        assert!(c.edges.is_empty());
    }

    #[test]
    fn induce_subgraph_cases() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let all = tri.induce_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(all.num_edges(), 3);
        let pair = tri.induce_subgraph(&[2, 0]).unwrap();
        assert_eq!(pair.num_nodes(), 2);
        assert_eq!(pair.num_edges(), 1);
        assert_eq!(pair.node_ids(), &[2, 0]);
        let edge = Graph::new(2, [(0, 1)]).unwrap();
        let one = edge.induce_subgraph(&[1]).unwrap();
        assert_eq!((one.num_nodes(), one.num_edges()), (1, 0));
        assert!(matches!(
            tri.induce_subgraph(&[0, 0]),
            Err(Error::DuplicateNode(0))
        ));
    }

    #[test]
    fn disjoint_union_cases() {
        let a = Graph::new(1, []).unwrap();
        let u = Graph::disjoint_union(&a, &a).unwrap();
        assert_eq!((u.num_nodes(), u.num_edges()), (2, 0));

        let e = Graph::new(2, [(0, 1)])
            .unwrap()
            .with_labels(vec![Some(0), Some(1)])
            .unwrap();
        let t = Graph::new(3, [(0, 1), (1, 2), (0, 2)])
            .unwrap()
            .with_labels(vec![Some(2), None, Some(2)])
            .unwrap();
        let u = Graph::disjoint_union(&e, &t).unwrap();
        assert_eq!((u.num_nodes(), u.num_edges()), (5, 4));
        assert_eq!(u.connected_components(), vec![0, 0, 1, 1, 1]);
        assert_eq!(
            u.labels().unwrap(),
            &[Some(0), Some(1), Some(2), None, Some(2)]
        );

        let x = e.clone().with_attributes(CsrMatrix::zeros(2, 3)).unwrap();
        let y = t.clone().with_attributes(CsrMatrix::zeros(3, 4)).unwrap();
        assert!(Graph::disjoint_union(&x, &y).is_err());
        assert!(Graph::disjoint_union(&x, &t).is_err());
    }

    #[test]
    fn degree_histograms() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(tri.degree_histogram(), BTreeMap::from([(2, 3)]));
        let star = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(star.degree_histogram(), BTreeMap::from([(1, 4), (4, 1)]));
    }

    #[test]
    fn node_set_view_rejects_duplicates() {
        assert!(NodeSetView::new(vec![1, 2, 1], NodeRole::Other).is_err());
        let v = NodeSetView::new(vec![4], NodeRole::Other).unwrap();
        assert!(v.validate(&path3()).is_err());
    }
}
