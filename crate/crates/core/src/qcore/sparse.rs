use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{QOperator, ZERO};

/// Compressed-row copy of a [`QOperator`], used by the propagators for
/// matrix-vector and matrix-matrix products.
#[derive(Clone, Debug)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn from_dense(op: &QOperator) -> Self {
        let dim = op.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let z = op.get(i, j);
                if z != ZERO {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// `y += alpha · A x`
    pub fn mul_vec_acc(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            *yi += alpha * acc;
        }
    }

    /// `out += alpha · A ρ`
    pub fn left_mul_acc(&self, alpha: C64, rho: &Array2<C64>, out: &mut Array2<C64>) {
        let n = self.dim;
        let src = rho.as_slice().expect("standard layout");
        let dst = out.as_slice_mut().expect("standard layout");
        for i in 0..n {
            let out_row = &mut dst[i * n..(i + 1) * n];
            for (k, v) in self.row(i) {
                let c = alpha * v;
                let in_row = &src[k * n..(k + 1) * n];
                for (o, r) in out_row.iter_mut().zip(in_row) {
                    *o += c * r;
                }
            }
        }
    }

    /// `out += alpha · ρ A`
    pub fn right_mul_acc(&self, alpha: C64, rho: &Array2<C64>, out: &mut Array2<C64>) {
        let n = self.dim;
        let src = rho.as_slice().expect("standard layout");
        let dst = out.as_slice_mut().expect("standard layout");
        for i in 0..n {
            let in_row = &src[i * n..(i + 1) * n];
            let out_row = &mut dst[i * n..(i + 1) * n];
            for (k, &r) in in_row.iter().enumerate() {
                if r == ZERO {
                    continue;
                }
                let c = alpha * r;
                for (j, v) in self.row(k) {
                    out_row[j] += c * v;
                }
            }
        }
    }

    /// Diagonal entries, if the operator is diagonal.
    pub fn as_diagonal(&self) -> Option<Vec<C64>> {
        let mut diag = vec![ZERO; self.dim];
        for (i, d) in diag.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                if j != i {
                    return None;
                }
                *d = v;
            }
        }
        Some(diag)
    }
}
