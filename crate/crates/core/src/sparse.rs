//! Minimal compressed-sparse-row matrix with the products the encoders need.

use ndarray::Array2;

/// Real-valued CSR matrix. Column indices within a row are sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from raw CSR parts. Panics if the parts are inconsistent.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(offsets.len(), rows + 1, "offsets length");
        assert_eq!(indices.len(), values.len(), "indices/values length");
        assert_eq!(*offsets.last().unwrap(), indices.len(), "final offset");
        debug_assert!(indices.iter().all(|&c| c < cols));
        Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        match idx.binary_search(&j) {
            Ok(p) => val[p],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                let p = cursor[c];
                indices[p] = r;
                values[p] = v;
                cursor[c] += 1;
            }
        }
        SparseMatrix::from_csr(self.cols, self.rows, offsets, indices, values)
    }

    /// Dense product `self · rhs`.
    pub fn matmul(&self, rhs: &Array2<f64>) -> Array2<f64> {
        assert_eq!(self.cols, rhs.nrows(), "spmm inner dimension");
        let width = rhs.ncols();
        let rhs = rhs.as_standard_layout();
        let src = rhs.as_slice().expect("standard layout");
        let mut out = vec![0.0; self.rows * width];
        for (r, dst) in out.chunks_mut(width.max(1)).enumerate().take(self.rows) {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                let src_row = &src[c * width..(c + 1) * width];
                for (d, s) in dst.iter_mut().zip(src_row) {
                    *d += v * s;
                }
            }
        }
        Array2::from_shape_vec((self.rows, width), out).expect("shape")
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                out[[r, c]] += v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample() -> SparseMatrix {
        // [[1, 0, 2], [0, 3, 0]]
        SparseMatrix::from_csr(2, 3, vec![0, 2, 3], vec![0, 2, 1], vec![1.0, 2.0, 3.0])
    }

    #[test]
    fn matmul_matches_dense() {
        let m = sample();
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        assert_eq!(m.matmul(&x), m.to_dense().dot(&x));
    }

    #[test]
    fn transpose_roundtrip() {
        let m = sample();
        assert_eq!(m.transpose().to_dense(), m.to_dense().t());
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(1, 0), 0.0);
    }
}
