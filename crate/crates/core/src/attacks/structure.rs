//! Edge generation for node sets whose connectivity is unknown.
//!
//! A k-nearest-neighbour graph on cosine similarity of attribute rows, then
//! density matching toward a target average degree.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::sparse::CsrMatrix;

/// Similarity-ranked neighbour candidates of one node, best first.
type Ranked = Vec<(usize, f64)>;

fn by_similarity(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// The `keep` most cosine-similar other rows for every row. All-zero rows
/// get an empty list. Ties rank the lower node id first.
pub fn ranked_neighbours(attrs: &CsrMatrix, keep: usize, exec: Exec) -> Vec<Ranked> {
    let n = attrs.rows();
    let unit = attrs.l2_normalized_rows();
    let by_feature = unit.transpose();
    par::map(exec, n, |i| {
        if unit.row_is_empty(i) {
            return Vec::new();
        }
        let mut sim = vec![0.0; n];
        let (cols, vals) = unit.row(i);
        for (&f, &v) in cols.iter().zip(vals) {
            let (rows, ws) = by_feature.row(f);
            for (&j, &w) in rows.iter().zip(ws) {
                sim[j] += v * w;
            }
        }
        let mut cand: Ranked = (0..n).filter(|&j| j != i).map(|j| (j, sim[j])).collect();
        let keep = keep.min(cand.len());
        if keep < cand.len() && keep > 0 {
            cand.select_nth_unstable_by(keep - 1, by_similarity);
            cand.truncate(keep);
        }
        cand.sort_by(by_similarity);
        cand.truncate(keep);
        cand
    })
}

/// Union-rule kNN graph on cosine similarity (`i–j` when either is among the
/// other's `k` nearest), then pruned or densified until the average degree
/// is as close to `target_avg_degree` as the candidates allow.
///
/// Pruning drops the least similar edges first and never isolates a node;
/// densifying adds the most similar non-edges among each node's next-ranked
/// candidates. Returns sorted `(u, v)` pairs with `u < v`.
pub fn generate_structure(
    attrs: &CsrMatrix,
    target_avg_degree: f64,
    k_neighbors: usize,
    exec: Exec,
) -> Result<Vec<(usize, usize)>> {
    let n = attrs.rows();
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "structure generation needs at least 2 nodes, got {n}"
        )));
    }
    if k_neighbors == 0 {
        return Err(Error::InvalidConfig("k_neighbors must be >= 1".into()));
    }
    if !(target_avg_degree > 0.0) {
        return Err(Error::InvalidConfig("target average degree must be > 0".into()));
    }
    let keep = k_neighbors + 2 * target_avg_degree.ceil() as usize + 2;
    let ranked = ranked_neighbours(attrs, keep, exec);

    let mut sim: HashMap<(usize, usize), f64> = HashMap::new();
    let mut edges = BTreeSet::new();
    for (i, list) in ranked.iter().enumerate() {
        for &(j, s) in list.iter().take(k_neighbors) {
            let e = (i.min(j), i.max(j));
            edges.insert(e);
            sim.insert(e, s);
        }
    }
    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let target_edges = target_avg_degree * n as f64 / 2.0;

    if edges.len() as f64 > target_edges {
        let mut order: Vec<((usize, usize), f64)> = edges.iter().map(|&e| (e, sim[&e])).collect();
        order.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        for ((u, v), _) in order {
            if edges.len() as f64 <= target_edges {
                break;
            }
            if degree[u] > 1 && degree[v] > 1 {
                edges.remove(&(u, v));
                degree[u] -= 1;
                degree[v] -= 1;
            }
        }
    } else if (edges.len() as f64) < target_edges {
        let mut extra: Vec<((usize, usize), f64)> = Vec::new();
        for (i, list) in ranked.iter().enumerate() {
            for &(j, s) in list.iter().skip(k_neighbors) {
                let e = (i.min(j), i.max(j));
                if !edges.contains(&e) {
                    extra.push((e, s));
                }
            }
        }
        extra.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        extra.dedup_by_key(|(e, _)| *e);
        for (e, _) in extra {
            if edges.len() as f64 >= target_edges {
                break;
            }
            edges.insert(e);
        }
    }
    Ok(edges.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn avg_degree(n: usize, edges: &[(usize, usize)]) -> f64 {
        2.0 * edges.len() as f64 / n as f64
    }

    #[test]
    fn identical_pair_gets_its_edge() {
        let x = CsrMatrix::from_dense(&array![[1.0, 2.0], [1.0, 2.0]]);
        assert_eq!(generate_structure(&x, 1.0, 1, Exec::Serial).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn ranking_breaks_ties_by_lower_id() {
        let x = CsrMatrix::from_dense(&array![[1.0], [1.0], [1.0]]);
        let r = ranked_neighbours(&x, 2, Exec::Serial);
        assert_eq!(r[2].iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn zero_rows_propose_nothing() {
        let x = CsrMatrix::from_dense(&array![[0.0, 0.0], [1.0, 0.0], [1.0, 0.1]]);
        let r = ranked_neighbours(&x, 2, Exec::Serial);
        assert!(r[0].is_empty());
        assert_eq!(r[1][0].0, 2);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let one = CsrMatrix::from_dense(&array![[1.0]]);
        assert!(generate_structure(&one, 2.0, 1, Exec::Serial).is_err());
        let two = CsrMatrix::from_dense(&array![[1.0], [1.0]]);
        assert!(generate_structure(&two, 2.0, 0, Exec::Serial).is_err());
    }

    #[test]
    fn pruning_meets_target_without_isolating() {
        let x = CsrMatrix::from_dense(&ndarray::Array2::from_shape_fn((30, 5), |(i, j)| {
            ((i * 7 + j * 3) % 11) as f64 + 0.5
        }));
        let edges = generate_structure(&x, 2.0, 6, Exec::Serial).unwrap();
        let d = avg_degree(30, &edges);
        assert!((d - 2.0).abs() <= 0.2, "{d}");
        let mut deg = [0; 30];
        for &(u, v) in &edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        assert!(deg.iter().all(|&d| d > 0));
    }
}
