//! Compressed sparse row matrices.
//!
//! Used for node attributes (bag-of-words rows are ~1% dense, one-hot rows
//! are a single entry) and for the normalized adjacency operator.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Row-major sparse matrix. Column indices within a row are strictly
/// increasing and explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= rows {
                return Err(Error::DimensionMismatch {
                    what: "triplet row",
                    expected: rows,
                    found: r,
                });
            }
            if c >= cols {
                return Err(Error::DimensionMismatch {
                    what: "triplet column",
                    expected: cols,
                    found: c,
                });
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (r, c, v) in sorted {
            let row = &mut row_entries[r];
            match row.last_mut() {
                Some((pc, pv)) if *pc == c => *pv += v,
                _ => row.push((c, v)),
            }
        }
        Ok(Self::from_sparse_rows(cols, row_entries))
    }

    /// Builds from per-row `(col, value)` lists that are already sorted by column.
    pub fn from_sparse_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &rows {
            for &(c, v) in row {
                debug_assert!(c < cols);
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            values,
        }
    }

    /// Builds from dense row vectors of length `cols`.
    pub fn from_dense_rows(cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut sparse_rows = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "dense row length",
                    expected: cols,
                    found: row.len(),
                });
            }
            sparse_rows.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect(),
            );
        }
        Ok(Self::from_sparse_rows(cols, sparse_rows))
    }

    pub fn from_dense(dense: &Array2<f64>) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = dense
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self::from_sparse_rows(dense.ncols(), rows)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                out[[r, c]] = v;
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_dense(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        let (idx, val) = self.row(r);
        for (&c, &v) in idx.iter().zip(val) {
            out[c] = v;
        }
        out
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, val) = self.row(r);
        match idx.binary_search(&c) {
            Ok(p) => val[p],
            Err(_) => 0.0,
        }
    }

    pub fn row_is_empty(&self, r: usize) -> bool {
        self.indptr[r] == self.indptr[r + 1]
    }

    /// Iterates `(row, col, value)` over stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                let p = next[c];
                indices[p] = r;
                values[p] = v;
                next[c] += 1;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let sparse_rows = rows
            .iter()
            .map(|&r| {
                let (idx, val) = self.row(r);
                idx.iter().copied().zip(val.iter().copied()).collect()
            })
            .collect();
        Self::from_sparse_rows(self.cols, sparse_rows)
    }

    /// Stacks `other` below `self`; column counts must agree.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                what: "feature dimension",
                expected: self.cols,
                found: other.cols,
            });
        }
        let offset = self.nnz();
        let mut indptr = self.indptr.clone();
        indptr.extend(other.indptr[1..].iter().map(|p| p + offset));
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&other.indices);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
        })
    }

    /// `self · dense` with the default execution policy.
    pub fn spmm(&self, dense: &Array2<f64>) -> Array2<f64> {
        self.spmm_with(dense, Exec::default())
    }

    /// `self · dense`; each output row is accumulated in column order, so the
    /// serial and parallel paths are bitwise identical.
    pub fn spmm_with(&self, dense: &Array2<f64>, exec: Exec) -> Array2<f64> {
        assert_eq!(
            self.cols,
            dense.nrows(),
            "spmm: inner dimensions {} vs {}",
            self.cols,
            dense.nrows()
        );
        let k = dense.ncols();
        let dense = dense.as_standard_layout();
        let src = dense.as_slice().expect("standard layout");
        let mut out = vec![0.0; self.rows * k];
        par::rows_mut(exec, &mut out, k, |r, row_out| {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                let src_row = &src[c * k..(c + 1) * k];
                for (o, s) in row_out.iter_mut().zip(src_row) {
                    *o += v * s;
                }
            }
        });
        Array2::from_shape_vec((self.rows, k), out).expect("shape")
    }

    /// Divides every stored entry of each row by the row's L2 norm.
    /// Rows with zero norm stay empty.
    pub fn l2_normalized_rows(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.rows {
            let (a, b) = (self.indptr[r], self.indptr[r + 1]);
            let norm = self.values[a..b].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut out.values[a..b] {
                    *v /= norm;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 2, 0.5)]).unwrap();
        assert_eq!(m.to_dense(), array![[0.0, 2.0, 0.0], [0.0, 0.0, 1.5]]);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(CsrMatrix::from_triplets(2, 2, &[(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn spmm_matches_dense_product() {
        let a = array![[1.0, 0.0, 2.0], [0.0, 0.0, 0.0], [0.5, -1.0, 0.0]];
        let b = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let s = CsrMatrix::from_dense(&a);
        assert_eq!(s.spmm_with(&b, Exec::Serial), a.dot(&b));
        assert_eq!(s.spmm_with(&b, Exec::Parallel), a.dot(&b));
    }

    #[test]
    fn transpose_and_vstack() {
        let a = array![[1.0, 0.0, 2.0], [0.0, 3.0, 0.0]];
        let s = CsrMatrix::from_dense(&a);
        assert_eq!(s.transpose().to_dense(), a.t().to_owned());
        let st = s.vstack(&CsrMatrix::identity(3)).unwrap();
        assert_eq!(st.rows(), 5);
        assert_eq!(st.get(4, 2), 1.0);
        assert_eq!(st.get(0, 2), 2.0);
        assert!(s.vstack(&CsrMatrix::identity(2)).is_err());
    }

    #[test]
    fn select_rows_and_normalize() {
        let s = CsrMatrix::from_dense(&array![[3.0, 4.0], [0.0, 0.0]]);
        let n = s.l2_normalized_rows();
        assert!((n.get(0, 0) - 0.6).abs() < 1e-15);
        assert!(n.row_is_empty(1));
        let picked = s.select_rows(&[1, 0, 0]);
        assert_eq!(picked.rows(), 3);
        assert_eq!(picked.row_dense(2), vec![3.0, 4.0]);
    }
}
