//! Greedy modularity maximization (Clauset–Newman–Moore).
//!
//! Starts from singleton communities and repeatedly merges the adjacent pair
//! with the largest modularity gain until no merge has a positive gain. Gains
//! are kept in exact integer form, `e_ij·2m − D_i·D_j`, which is the true gain
//! scaled by `(2m)²/2`; ties go to the lexicographically lowest id pair.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeRole, NodeSetView};

pub fn greedy_modularity_communities(g: &Graph) -> Result<Vec<NodeSetView>> {
    if g.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.num_nodes();
    let two_m = 2 * g.num_edges() as i128;

    // links[c] : neighbouring community -> number of edges between them
    let mut links: Vec<BTreeMap<usize, i128>> = vec![BTreeMap::new(); n];
    for &(u, v) in g.edges() {
        links[u].insert(v, 1);
        links[v].insert(u, 1);
    }
    let mut degree_sum: Vec<i128> = (0..n).map(|v| g.degree(v) as i128).collect();
    let mut alive = vec![true; n];
    let mut parent: Vec<usize> = (0..n).collect();

    let gain = |links: &[BTreeMap<usize, i128>], degree_sum: &[i128], i: usize, j: usize| {
        links[i][&j] * two_m - degree_sum[i] * degree_sum[j]
    };

    let mut heap = BinaryHeap::new();
    for &(u, v) in g.edges() {
        heap.push((gain(&links, &degree_sum, u, v), Reverse(u), Reverse(v)));
    }

    while let Some((key, Reverse(i), Reverse(j))) = heap.pop() {
        if key <= 0 {
            break;
        }
        if !alive[i] || !alive[j] || !links[i].contains_key(&j) {
            continue;
        }
        if gain(&links, &degree_sum, i, j) != key {
            continue;
        }
        // merge j into i (i < j)
        alive[j] = false;
        parent[j] = i;
        let absorbed = std::mem::take(&mut links[j]);
        for (k, count) in absorbed {
            if k == i {
                continue;
            }
            *links[i].entry(k).or_insert(0) += count;
            let back = links[k].remove(&j).unwrap_or(0);
            *links[k].entry(i).or_insert(0) += back;
        }
        links[i].remove(&j);
        degree_sum[i] += degree_sum[j];
        for &k in links[i].keys() {
            let (a, b) = (i.min(k), i.max(k));
            heap.push((gain(&links, &degree_sum, a, b), Reverse(a), Reverse(b)));
        }
    }

    let root = |mut v: usize| {
        while parent[v] != v {
            v = parent[v];
        }
        v
    };
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        groups.entry(root(v)).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out.into_iter()
        .map(|ids| NodeSetView::new(ids, NodeRole::Other))
        .collect()
}

/// Newman modularity of a partition given as one community index per node.
pub fn modularity(g: &Graph, community_of: &[usize]) -> f64 {
    let m = g.num_edges() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = community_of.iter().copied().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for &(u, v) in g.edges() {
        if community_of[u] == community_of[v] {
            internal[community_of[u]] += 1.0;
        }
    }
    for v in 0..g.num_nodes() {
        degree[community_of[v]] += g.degree(v) as f64;
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - (d / (2.0 * m)).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(c: &[NodeSetView]) -> Vec<Vec<usize>> {
        c.iter().map(|v| v.ids().to_vec()).collect()
    }

    #[test]
    fn two_triangles_stay_apart() {
        let g = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let c = greedy_modularity_communities(&g).unwrap();
        assert_eq!(ids(&c), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = Graph::new(3, []).unwrap();
        assert!(matches!(
            greedy_modularity_communities(&g),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn isolated_nodes_are_singletons() {
        let g = Graph::new(4, [(0, 1)]).unwrap();
        let c = greedy_modularity_communities(&g).unwrap();
        assert_eq!(ids(&c), vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn modularity_of_known_partitions() {
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(modularity(&g, &[0, 0, 0, 0]).abs() < 1e-15);
        assert!((modularity(&g, &[0, 1, 2, 3]) + 0.25).abs() < 1e-15);
    }
}
