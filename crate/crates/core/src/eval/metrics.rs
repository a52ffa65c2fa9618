use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;

fn check_cover(len: usize, nodes: &[usize]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet("evaluation nodes"));
    }
    match nodes.iter().find(|&&v| v >= len) {
        Some(&id) => Err(Error::UnknownNode { id, num_nodes: len }),
        None => Ok(()),
    }
}

/// Share of `nodes` on which two models emit the same hard label.
pub fn fidelity(surrogate: &[usize], victim: &[usize], nodes: &[usize]) -> Result<f64> {
    check_cover(surrogate.len().min(victim.len()), nodes)?;
    let same = nodes.iter().filter(|&&v| surrogate[v] == victim[v]).count();
    Ok(same as f64 / nodes.len() as f64)
}

/// Share of `nodes` whose hard label equals the ground truth.
pub fn accuracy(preds: &[usize], labels: &[Option<usize>], nodes: &[usize]) -> Result<f64> {
    check_cover(preds.len().min(labels.len()), nodes)?;
    let mut hits = 0;
    for &v in nodes {
        match labels[v] {
            Some(c) if c == preds[v] => hits += 1,
            Some(_) => {}
            None => return Err(Error::MissingLabel(v)),
        }
    }
    Ok(hits as f64 / nodes.len() as f64)
}

/// Mean and sample standard deviation; the deviation is 0 for one value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `NaN` when
/// either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, _) = mean_std(&rx);
    let (my, _) = mean_std(&ry);
    let mut num = 0.0;
    let (mut dx, mut dy) = (0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        num += (a - mx) * (b - my);
        dx += (a - mx) * (a - mx);
        dy += (b - my) * (b - my);
    }
    num / (dx * dy).sqrt()
}

/// Degree → node count.
pub fn degree_distribution(g: &Graph) -> BTreeMap<usize, usize> {
    g.degree_histogram()
}

/// `degree,count` CSV of [`degree_distribution`].
pub fn degree_table(g: &Graph) -> String {
    let mut s = String::from("degree,count\n");
    for (d, c) in degree_distribution(g) {
        writeln!(s, "{d},{c}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_examples() {
        assert_eq!(fidelity(&[1, 2, 3, 4], &[1, 2, 3, 0], &[0, 1, 2, 3]).unwrap(), 0.75);
        assert_eq!(fidelity(&[0, 0], &[1, 1], &[0, 1]).unwrap(), 0.0);
        assert_eq!(fidelity(&[5, 6], &[5, 6], &[1]).unwrap(), 1.0);
        assert!(fidelity(&[0], &[0], &[]).is_err());
        assert!(fidelity(&[0], &[0], &[3]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let labels = [Some(0), Some(1), None];
        assert_eq!(accuracy(&[0, 1, 0], &labels, &[0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 1, 0], &labels, &[0, 1]).unwrap(), 0.5);
        assert!(matches!(accuracy(&[0, 1, 0], &labels, &[2]), Err(Error::MissingLabel(2))));
    }

    #[test]
    fn mean_std_uses_sample_deviation() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[0.4]), (0.4, 0.0));
    }

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!(spearman(&[1.0, 2.0], &[5.0, 5.0]).is_nan());
    }

    #[test]
    fn degree_examples() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(degree_distribution(&tri), BTreeMap::from([(2, 3)]));
        let star = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(degree_distribution(&star), BTreeMap::from([(1, 4), (4, 1)]));
        assert_eq!(degree_table(&star), "degree,count\n1,4\n4,1\n");
    }
}
