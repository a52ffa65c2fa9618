use std::sync::atomic::{AtomicUsize, Ordering};

use super::model::{predict, GcnModel};
use crate::adjacency::NormalizedAdjacency;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Hard-label black-box access to a victim model on its own graph.
///
/// Predictions are computed once in eval mode at construction and only the
/// argmax class ids are retained, so posteriors cannot leak through this type.
#[derive(Debug)]
pub struct Oracle {
    labels: Vec<usize>,
    num_classes: usize,
    queries: AtomicUsize,
}

impl Oracle {
    pub fn new(model: &GcnModel, adj: &NormalizedAdjacency, attrs: &CsrMatrix) -> Result<Self> {
        if !model.is_trained() {
            return Err(Error::InvalidConfig("oracle requires a trained model".into()));
        }
        let pred = predict(model, adj, attrs)?;
        Ok(Self {
            labels: pred.hard_labels().to_vec(),
            num_classes: model.num_classes(),
            queries: AtomicUsize::new(0),
        })
    }

    /// Returns the victim's label for each requested node. Every requested
    /// node counts as one query, repeats included.
    pub fn query(&self, nodes: &[usize]) -> Result<Vec<usize>> {
        let out = nodes
            .iter()
            .map(|&v| {
                self.labels.get(v).copied().ok_or(Error::UnknownNode {
                    id: v,
                    num_nodes: self.labels.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.queries.fetch_add(nodes.len(), Ordering::Relaxed);
        Ok(out)
    }

    pub fn query_count(&self) -> usize {
        self.queries.load(Ordering::Relaxed)
    }

    /// Size of the label space the service answers in.
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }
}

/// Queries `oracle` for `node_ids`.
pub fn query_oracle(oracle: &Oracle, node_ids: &[usize]) -> Result<Vec<usize>> {
    oracle.query(node_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjacency::normalize_adjacency;
    use crate::gcn::train::{train, TrainConfig};
    use crate::graph::{Graph, NodeRole, NodeSetView};

    fn setup() -> (Graph, GcnModel) {
        let g = Graph::new(4, [(0, 1), (2, 3)])
            .unwrap()
            .with_attributes(CsrMatrix::identity(4))
            .unwrap()
            .with_labels(vec![Some(0), Some(0), Some(1), Some(1)])
            .unwrap();
        let all = NodeSetView::new(vec![0, 1, 2, 3], NodeRole::Other).unwrap();
        let none = NodeSetView::new(vec![], NodeRole::Other).unwrap();
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let m = train(&g, &all, &none, 2, &cfg).unwrap();
        (g, m)
    }

    #[test]
    fn answers_match_eval_forward_and_count_queries() {
        let (g, m) = setup();
        let adj = normalize_adjacency(&g);
        let attrs = g.attributes().unwrap();
        let oracle = Oracle::new(&m, &adj, attrs).unwrap();
        let expected = predict(&m, &adj, attrs).unwrap();
        assert_eq!(oracle.query(&[0, 1, 2, 3]).unwrap(), expected.hard_labels());
        assert_eq!(oracle.query_count(), 4);
        let a = oracle.query(&[2]).unwrap();
        let b = query_oracle(&oracle, &[2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(oracle.query_count(), 6);
    }

    #[test]
    fn unknown_node_is_rejected_without_counting() {
        let (g, m) = setup();
        let adj = normalize_adjacency(&g);
        let oracle = Oracle::new(&m, &adj, g.attributes().unwrap()).unwrap();
        assert!(matches!(
            oracle.query(&[0, 9]),
            Err(Error::UnknownNode { id: 9, .. })
        ));
        assert_eq!(oracle.query_count(), 0);
    }

    #[test]
    fn untrained_model_rejected() {
        let (g, m) = setup();
        let fresh = GcnModel::new(m.w0().clone(), m.w1().clone(), 0.5).unwrap();
        let adj = normalize_adjacency(&g);
        assert!(Oracle::new(&fresh, &adj, g.attributes().unwrap()).is_err());
    }
}
