use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the weight of an empty hop class is handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyHopPolicy {
    /// An empty hop class contributes the zero vector; the other keeps its weight.
    #[default]
    Zero,
    /// The non-empty hop class receives the full weight.
    Renormalize,
}

/// A known attacker neighbour: its sparse attribute row and its degree.
#[derive(Debug, Clone, Copy)]
pub struct KnownNeighbour<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
    pub degree: usize,
}

/// Attribute estimate for an unobserved node:
///
/// `α · mean_j(x_j / D_j)` over 1-hop attacker neighbours plus
/// `(1 − α) · mean_j(x_j / D_j)` over strictly-2-hop attacker neighbours.
///
/// Returns a sorted sparse row of width `dim`. `node` only labels the error
/// raised when both neighbour sets are empty.
pub fn synthesize_attributes(
    node: usize,
    one_hop: &[KnownNeighbour<'_>],
    two_hop: &[KnownNeighbour<'_>],
    alpha: f64,
    policy: EmptyHopPolicy,
    dim: usize,
) -> Result<Vec<(usize, f64)>> {
    if one_hop.is_empty() && two_hop.is_empty() {
        return Err(Error::NoKnownNeighbour(node));
    }
    let (w1, w2) = match policy {
        EmptyHopPolicy::Renormalize if one_hop.is_empty() => (0.0, 1.0),
        EmptyHopPolicy::Renormalize if two_hop.is_empty() => (1.0, 0.0),
        _ => (alpha, 1.0 - alpha),
    };
    let mut acc = vec![0.0; dim];
    let mut touched = vec![false; dim];
    for (set, weight) in [(one_hop, w1), (two_hop, w2)] {
        if set.is_empty() || weight == 0.0 {
            continue;
        }
        let n = set.len() as f64;
        for nb in set {
            let scale = weight / (n * nb.degree.max(1) as f64);
            for (&c, &v) in nb.indices.iter().zip(nb.values) {
                if c >= dim {
                    return Err(Error::DimensionMismatch {
                        what: "neighbour attribute column",
                        expected: dim,
                        found: c + 1,
                    });
                }
                acc[c] += v * scale;
                touched[c] = true;
            }
        }
    }
    Ok((0..dim)
        .filter(|&c| touched[c] && acc[c] != 0.0)
        .map(|c| (c, acc[c]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nb<'a>(indices: &'a [usize], values: &'a [f64], degree: usize) -> KnownNeighbour<'a> {
        KnownNeighbour {
            indices,
            values,
            degree,
        }
    }

    #[test]
    fn single_one_hop_neighbour_with_unit_degree_is_copied() {
        let x = synthesize_attributes(0, &[nb(&[0, 2], &[3.0, 1.5], 1)], &[], 1.0, EmptyHopPolicy::Zero, 3)
            .unwrap();
        assert_eq!(x, vec![(0, 3.0), (2, 1.5)]);
    }

    #[test]
    fn two_hop_only_divides_by_degree() {
        let x = synthesize_attributes(0, &[], &[nb(&[0, 1], &[2.0, 4.0], 2)], 0.0, EmptyHopPolicy::Zero, 2)
            .unwrap();
        assert_eq!(x, vec![(0, 1.0), (1, 2.0)]);
    }

    #[test]
    fn mixed_example() {
        let one = [nb(&[0], &[4.0], 2), nb(&[1], &[4.0], 4)];
        let two = [nb(&[0, 1], &[8.0, 8.0], 8)];
        let x = synthesize_attributes(0, &one, &two, 0.5, EmptyHopPolicy::Zero, 2).unwrap();
        assert_eq!(x, vec![(0, 1.0), (1, 0.75)]);
    }

    #[test]
    fn empty_hop_policies() {
        let two = [nb(&[0], &[2.0], 1)];
        let zero = synthesize_attributes(0, &[], &two, 0.8, EmptyHopPolicy::Zero, 1).unwrap();
        assert!((zero[0].1 - 0.4).abs() < 1e-15);
        let renorm = synthesize_attributes(0, &[], &two, 0.8, EmptyHopPolicy::Renormalize, 1).unwrap();
        assert_eq!(renorm, vec![(0, 2.0)]);
    }

    #[test]
    fn no_neighbours_is_an_error() {
        assert!(matches!(
            synthesize_attributes(7, &[], &[], 0.5, EmptyHopPolicy::Zero, 4),
            Err(Error::NoKnownNeighbour(7))
        ));
    }
}
