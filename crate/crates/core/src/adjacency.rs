use ndarray::Array2;

use crate::graph::Graph;
use crate::par::Exec;
use crate::sparse::CsrMatrix;

/// The operator `D̂^{-1/2} (A + I) D̂^{-1/2}` with `d̂_i = 1 + deg(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: CsrMatrix,
}

pub fn normalize_adjacency(g: &Graph) -> NormalizedAdjacency {
    let n = g.num_nodes();
    let d_hat: Vec<usize> = (0..n).map(|i| 1 + g.degree(i)).collect();
    let entry = |i: usize, j: usize| 1.0 / ((d_hat[i] * d_hat[j]) as f64).sqrt();
    let rows = (0..n)
        .map(|i| {
            // neighbour lists are sorted, so splicing the diagonal in keeps order
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(g.degree(i) + 1);
            let mut placed = false;
            for &j in g.neighbors(i) {
                if !placed && j > i {
                    row.push((i, entry(i, i)));
                    placed = true;
                }
                row.push((j, entry(i, j)));
            }
            if !placed {
                row.push((i, entry(i, i)));
            }
            row
        })
        .collect();
    NormalizedAdjacency {
        matrix: CsrMatrix::from_sparse_rows(n, rows),
    }
}

impl NormalizedAdjacency {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    /// `Â · dense`.
    pub fn apply(&self, dense: &Array2<f64>) -> Array2<f64> {
        self.matrix.spmm(dense)
    }

    pub fn apply_with(&self, dense: &Array2<f64>, exec: Exec) -> Array2<f64> {
        self.matrix.spmm_with(dense, exec)
    }
}
