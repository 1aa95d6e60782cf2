use num_traits::Float;
use rayon::prelude::*;

use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<S> {
    /// Unit-lower `L` below the diagonal, `U` on and above it.
    factors: Mat<S>,
    /// `perm[i]` is the original row placed at position `i`.
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    pub fn factorize(a: &Mat<S>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("LU of non-square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let tiny = scale * S::Real::epsilon() * S::Real::count(n.max(1));
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let m = lu[(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                let data = lu.as_mut_slice();
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            let (head, tail) = lu.as_mut_slice().split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            tail.par_chunks_mut(n).for_each(|row| {
                let f = row[k] / pivot;
                row[k] = f;
                if f == S::zero() {
                    return;
                }
                for j in k + 1..n {
                    row[j] -= f * pivot_row[j];
                }
            });
        }
        Ok(Lu { factors: lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A X = B` for all columns of `B`.
    pub fn solve(&self, b: &Mat<S>) -> Mat<S> {
        let n = self.dim();
        assert_eq!(b.rows(), n, "right-hand side has wrong row count");
        let mut x = b.permute_rows(&self.perm);
        let m = x.cols();
        let lu = &self.factors;
        // forward substitution, L has unit diagonal
        for i in 0..n {
            let (done, rest) = x.as_mut_slice().split_at_mut(i * m);
            let xi = &mut rest[..m];
            for (k, &l) in lu.row(i)[..i].iter().enumerate() {
                if l == S::zero() {
                    continue;
                }
                let xk = &done[k * m..(k + 1) * m];
                for (a, &b) in xi.iter_mut().zip(xk) {
                    *a -= l * b;
                }
            }
        }
        for i in (0..n).rev() {
            let (head, rest) = x.as_mut_slice().split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for (off, &u) in lu.row(i)[i + 1..].iter().enumerate() {
                if u == S::zero() {
                    continue;
                }
                let k = off;
                let xk = &rest[k * m..(k + 1) * m];
                for (a, &b) in xi.iter_mut().zip(xk) {
                    *a -= u * b;
                }
            }
            let d = lu[(i, i)];
            for a in xi.iter_mut() {
                *a /= d;
            }
        }
        x
    }

    pub fn solve_vec(&self, b: &[S]) -> Vec<S> {
        let bm = Mat::from_vec(b.len(), 1, b.to_vec()).expect("column vector");
        self.solve(&bm).as_slice().to_vec()
    }

    pub fn inverse(&self) -> Mat<S> {
        self.solve(&Mat::identity(self.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn solves_real_system() {
        let a = Mat::from_rows(&[
            vec![2.0, 1.0, 1.0],
            vec![4.0, -6.0, 0.0],
            vec![-2.0, 7.0, 2.0],
        ])
        .unwrap();
        let lu = Lu::factorize(&a).unwrap();
        let inv = lu.inverse();
        assert!(a.matmul(&inv).max_abs_diff(&Mat::identity(3)) < 1e-14);
        let x = lu.solve_vec(&[5.0, -2.0, 9.0]);
        let back = a.matvec(&x);
        for (u, v) in back.iter().zip([5.0, -2.0, 9.0]) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_detected() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(Lu::factorize(&a), Err(Error::Singular(_))));
    }

    #[test]
    fn complex_inverse() {
        let a = Mat::from_fn(4, 4, |i, j| {
            Complex64::new((i + 2 * j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 }, (i as f64 - j as f64) * 0.3)
        });
        let inv = Lu::factorize(&a).unwrap().inverse();
        assert!(inv.matmul(&a).max_abs_diff(&Mat::identity(4)) < 1e-13);
    }
}
