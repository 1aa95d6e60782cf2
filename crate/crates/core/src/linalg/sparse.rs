//! Compressed sparse row storage.

use std::collections::HashMap;

use num_traits::{Float, One, Zero};
use rayon::prelude::*;

use super::Mat;
use crate::scalar::Scalar;

/// Square or rectangular matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<S> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> Csr<S> {
    /// Keeps every entry of `m` that is not exactly zero.
    pub fn from_dense(m: &Mat<S>) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.rows() {
            for (j, &x) in m.row(i).iter().enumerate() {
                if x != S::zero() {
                    col_idx.push(j);
                    values.push(x);
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

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// Multiplies row `i` by `s`.
    pub fn scale_row(&mut self, i: usize, s: S) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        for v in &mut self.values[r] {
            *v *= s;
        }
    }

    pub fn to_dense(&self) -> Mat<S> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// `self * dense`. Each output row is a fixed-order sum, so the result
    /// does not depend on the thread count.
    pub fn mul_dense(&self, dense: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, dense.rows(), "inner dimension mismatch");
        let n = dense.cols();
        let mut out = Mat::zeros(self.rows, n);
        out.as_mut_slice().par_chunks_mut(n.max(1)).enumerate().for_each(|(i, orow)| {
            for (k, v) in self.row(i) {
                for (o, &d) in orow.iter_mut().zip(dense.row(k)) {
                    *o += v * d;
                }
            }
        });
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.rows).map(|i| self.row(i).map(|(j, a)| a * v[j]).sum()).collect()
    }

    /// `max |A†A − 1|`, accumulating only the structurally non-zero entries.
    pub fn unitarity_defect(&self) -> S::Real {
        assert_eq!(self.rows, self.cols, "unitarity needs a square matrix");
        let mut gram: HashMap<(usize, usize), S> = HashMap::new();
        for i in 0..self.rows {
            for (j, a) in self.row(i) {
                for (l, b) in self.row(i) {
                    *gram.entry((j, l)).or_insert_with(S::zero) += a.conj() * b;
                }
            }
        }
        let mut worst = S::Real::zero();
        for j in 0..self.cols {
            if !gram.contains_key(&(j, j)) {
                worst = worst.max(S::Real::one());
            }
        }
        for (&(j, l), &g) in &gram {
            let target = if j == l { S::one() } else { S::zero() };
            worst = worst.max((g - target).modulus());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let a = Mat::from_fn(5, 5, |i, j| if (i + 2 * j) % 3 == 0 { (i + j) as f64 } else { 0.0 });
        let b = Mat::from_fn(5, 4, |i, j| (i as f64) - 0.5 * j as f64);
        let s = Csr::from_dense(&a);
        assert!(s.nnz() < 25);
        assert_eq!(s.to_dense(), a);
        assert!(s.mul_dense(&b).max_abs_diff(&a.matmul(&b)) < 1e-14);
        let v = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        let dv = a.matvec(&v);
        for (x, y) in s.mul_vec(&v).iter().zip(&dv) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn sparse_unitarity_matches_dense() {
        use crate::scattering::{PropagationMatrix, VertexKind};
        let b = PropagationMatrix::<f64>::complete(5, VertexKind::Dft).unwrap();
        let s = Csr::from_dense(b.matrix());
        assert!((s.unitarity_defect() - b.matrix().unitarity_defect()).abs() < 1e-14);
        assert!(s.unitarity_defect() < 1e-13);
        let a = Mat::from_fn(4, 4, |i, j| if i == j && i != 2 { 1.0 } else { 0.0 });
        assert_eq!(Csr::from_dense(&a).unitarity_defect(), 1.0);
        let c = Mat::from_fn(3, 3, |i, j| if i == j { 1.0 + 0.1 * i as f64 } else { 0.0 });
        assert!((Csr::from_dense(&c).unitarity_defect() - (1.2f64 * 1.2 - 1.0)).abs() < 1e-14);
    }
}
