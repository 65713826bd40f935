use super::matrix::Matrix;

/// Compressed-row view of a dense matrix, used to speed up products with the sparse
/// adjacency. Built from, and always equal to, a dense [`Matrix`].
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_dense(m: &Matrix) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows: m.rows(), cols: m.cols(), row_ptr, col_idx, values }
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

    /// `out = self * x`
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *o = s;
        }
    }

    /// `out = self * b` where `b` is a row-major `cols × width` block.
    pub fn matmul_dense_into(&self, b: &[f64], width: usize, out: &mut [f64]) {
        debug_assert_eq!(b.len(), self.cols * width);
        for i in 0..self.rows {
            let dst = &mut out[i * width..(i + 1) * width];
            dst.fill(0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.values[k];
                let src = &b[self.col_idx[k] * width..(self.col_idx[k] + 1) * width];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_products() {
        let m = Matrix::from_fn(4, 3, |i, j| if (i + j) % 2 == 0 { (i + 1) as f64 * 0.5 - j as f64 } else { 0.0 });
        let csr = CsrMatrix::from_dense(&m);
        assert_eq!(csr.nnz(), m.count_nonzero());
        let x = [1.0, -2.0, 0.5];
        let mut out = [0.0; 4];
        csr.matvec_into(&x, &mut out);
        assert_eq!(out.to_vec(), m.matvec(&x).unwrap());

        let b = Matrix::from_fn(3, 2, |i, j| i as f64 - j as f64 * 1.5);
        let mut prod = vec![0.0; 8];
        csr.matmul_dense_into(b.as_slice(), 2, &mut prod);
        assert!(Matrix::new(4, 2, prod).unwrap().max_abs_diff(&m.matmul(&b).unwrap()) < 1e-14);
    }
}
