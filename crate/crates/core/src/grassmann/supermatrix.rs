use num_complex::Complex;
use num_traits::One;

use super::element::{Grassmann, Parity};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Mat};
use crate::rng::Rng;
use crate::scalar::Real;

/// Statistics of an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grade {
    Boson,
    Fermion,
}

impl Grade {
    #[inline]
    fn bit(self) -> u8 {
        match self {
            Grade::Boson => 0,
            Grade::Fermion => 1,
        }
    }
}

/// Hard cap on series terms in the matrix functions.
const MAX_SERIES_TERMS: usize = 4000;
/// Relative size of a series term below which summation stops.
const SERIES_TAIL: f64 = 1e-16;
/// Body Frobenius norm at which power series are refused.
const SERIES_RADIUS: f64 = 1.0;

/// Square matrix over the exterior algebra with a boson/fermion grading
/// per index.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrix<T> {
    gens: usize,
    grading: Vec<Grade>,
    entries: Vec<Grassmann<T>>,
}

impl<T: Real> SuperMatrix<T> {
    pub fn zeros(gens: usize, grading: &[Grade]) -> Self {
        let n = grading.len();
        SuperMatrix {
            gens,
            grading: grading.to_vec(),
            entries: vec![Grassmann::zero(gens); n * n],
        }
    }

    pub fn identity(gens: usize, grading: &[Grade]) -> Self {
        let mut m = Self::zeros(gens, grading);
        for i in 0..grading.len() {
            m.entries[i * grading.len() + i] = Grassmann::one(gens);
        }
        m
    }

    pub fn from_fn(gens: usize, grading: &[Grade], mut f: impl FnMut(usize, usize) -> Grassmann<T>) -> Self {
        let n = grading.len();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let e = f(i, j);
                assert_eq!(e.gens(), gens, "generator count mismatch");
                entries.push(e);
            }
        }
        SuperMatrix {
            gens,
            grading: grading.to_vec(),
            entries,
        }
    }

    /// Ordinary complex matrix placed in the body.
    pub fn from_numeric(gens: usize, grading: &[Grade], m: &Mat<Complex<T>>) -> Self {
        assert_eq!(m.rows(), grading.len());
        assert!(m.is_square());
        Self::from_fn(gens, grading, |i, j| Grassmann::scalar(gens, m[(i, j)]))
    }

    pub fn diag(gens: usize, grading: &[Grade], values: &[Complex<T>]) -> Self {
        assert_eq!(values.len(), grading.len());
        let mut m = Self::zeros(gens, grading);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * grading.len() + i] = Grassmann::scalar(gens, v);
        }
        m
    }

    /// Random supermatrix with even entries in the diagonal blocks and odd
    /// entries elsewhere. Bodies lie in the disc of radius `body_radius`.
    pub fn random(gens: usize, grading: &[Grade], body_radius: T, soul_scale: T, rng: &mut Rng) -> Self {
        Self::from_fn(gens, grading, |i, j| {
            let parity = if grading[i] == grading[j] {
                Parity::Even
            } else {
                Parity::Odd
            };
            Grassmann::random(gens, parity, body_radius, soul_scale, rng)
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grading.len()
    }

    #[inline]
    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn grading(&self) -> &[Grade] {
        &self.grading
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Grassmann<T> {
        &self.entries[i * self.dim() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Grassmann<T>) {
        assert_eq!(value.gens(), self.gens, "generator count mismatch");
        let n = self.dim();
        self.entries[i * n + j] = value;
    }

    /// Entries in grading-consistent positions have the right parity.
    pub fn is_even(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let e = self.get(i, j);
                if e.is_zero() {
                    return true;
                }
                let expect = if self.grading[i] == self.grading[j] {
                    Parity::Even
                } else {
                    Parity::Odd
                };
                e.parity() == expect
            })
        })
    }

    pub fn body(&self) -> Mat<Complex<T>> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.get(i, j).body())
    }

    pub fn soul(&self) -> Self {
        self.map(|e| e.soul())
    }

    fn map(&self, f: impl Fn(&Grassmann<T>) -> Grassmann<T>) -> Self {
        SuperMatrix {
            gens: self.gens,
            grading: self.grading.clone(),
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.gens, other.gens, "generator count mismatch");
        assert_eq!(self.grading, other.grading, "grading mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        SuperMatrix {
            gens: self.gens,
            grading: self.grading.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_compatible(other);
        SuperMatrix {
            gens: self.gens,
            grading: self.grading.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|e| -e)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|e| e.scale(s))
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Self {
        Self::identity(self.gens, &self.grading).sub(self)
    }

    /// `1 + self`.
    pub fn one_plus(&self) -> Self {
        Self::identity(self.gens, &self.grading).add(self)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let n = self.dim();
        let mut out = Self::zeros(self.gens, &self.grading);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    out.entries[i * n + j].add_product(a, b);
                }
            }
        }
        out
    }

    /// Product of a chain of matrices, left to right.
    pub fn product(factors: &[&Self]) -> Self {
        let (first, rest) = factors.split_first().expect("at least one factor");
        rest.iter().fold((*first).clone(), |acc, m| acc.matmul(m))
    }

    /// `STr M = Σ_i (−1)^{grade i} M_ii`.
    pub fn str(&self) -> Grassmann<T> {
        let mut s = Grassmann::zero(self.gens);
        for (i, g) in self.grading.iter().enumerate() {
            match g {
                Grade::Boson => s.add_assign_ref(self.get(i, i)),
                Grade::Fermion => s = &s - self.get(i, i),
            }
        }
        s
    }

    /// Ordinary trace.
    pub fn trace(&self) -> Grassmann<T> {
        let mut s = Grassmann::zero(self.gens);
        for i in 0..self.dim() {
            s.add_assign_ref(self.get(i, i));
        }
        s
    }

    /// Inverse by the body inverse and a terminating Neumann series in the
    /// nilpotent part.
    pub fn inverse(&self) -> Result<Self> {
        let binv = Lu::factorize(&self.body())
            .map_err(|_| Error::NotInvertible("supermatrix with singular body".into()))?
            .inverse();
        let binv = Self::from_numeric(self.gens, &self.grading, &binv);
        // M = B (1 + B⁻¹N)  ⇒  M⁻¹ = Σ_k (−B⁻¹N)^k B⁻¹
        let step = binv.matmul(&self.soul()).neg();
        let mut term = binv.clone();
        let mut out = binv;
        for _ in 0..self.gens {
            term = step.matmul(&term);
            if term.entries.iter().all(Grassmann::is_zero) {
                break;
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, e| m.max(e.max_abs()))
    }

    /// Largest coefficient deviation over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.check_compatible(other);
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    /// `Σ_k c_k X^k`; the body of `X` must have Frobenius norm below one.
    pub fn power_series(&self, c: impl Fn(usize) -> T) -> Result<Self> {
        let norm = self.body().frobenius_norm();
        if !(norm < T::lit(SERIES_RADIUS)) {
            return Err(Error::RescaleRequired { norm: norm.as_f64() });
        }
        let mut out = Self::identity(self.gens, &self.grading).scale(Complex::from(c(0)));
        let mut power = Self::identity(self.gens, &self.grading);
        let mut quiet = 0;
        for k in 1..MAX_SERIES_TERMS {
            power = power.matmul(self);
            let term = power.scale(Complex::from(c(k)));
            let size = term.max_abs();
            out = out.add(&term);
            let floor = T::lit(SERIES_TAIL) * out.max_abs().max(T::one());
            if size <= floor {
                quiet += 1;
                // soul contributions can grow before they decay
                if quiet >= 2 && k > 2 * self.gens {
                    return Ok(out);
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::ConvergenceFailure {
            iterations: MAX_SERIES_TERMS,
            estimate: norm.as_f64(),
            residual: f64::NAN,
        })
    }

    /// `ln(1 − X)`.
    pub fn ln_one_minus(&self) -> Result<Self> {
        self.power_series(|k| if k == 0 { T::zero() } else { -T::count(k).recip() })
    }

    /// `ln(1 + X)`.
    pub fn ln_one_plus(&self) -> Result<Self> {
        self.neg().ln_one_minus()
    }

    /// `(1 − X)^{−1/2}`.
    pub fn inv_sqrt_one_minus(&self) -> Result<Self> {
        // C(−1/2, k)(−1)^k = (2k)! / (4^k (k!)²)
        self.power_series(|k| {
            (1..=k).fold(T::one(), |c, i| c * T::count(2 * i - 1) / T::count(2 * i))
        })
    }

    /// `(1 + X)^{−1/2}`.
    pub fn inv_sqrt_one_plus(&self) -> Result<Self> {
        self.neg().inv_sqrt_one_minus()
    }

    /// Quadrants `[[A, B], [C, D]]` of a matrix split in the middle.
    pub fn quadrants(&self) -> [Self; 4] {
        let n = self.dim();
        assert!(n % 2 == 0, "quadrants of odd-sized matrix");
        let h = n / 2;
        assert_eq!(self.grading[..h], self.grading[h..], "halves graded differently");
        let sub = |r0: usize, c0: usize| {
            SuperMatrix::from_fn(self.gens, &self.grading[..h], |i, j| self.get(r0 + i, c0 + j).clone())
        };
        [sub(0, 0), sub(0, h), sub(h, 0), sub(h, h)]
    }

    /// Inverse of [`quadrants`](Self::quadrants).
    pub fn from_quadrants(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        for m in [b, c, d] {
            a.check_compatible(m);
        }
        let h = a.dim();
        let grading: Vec<Grade> = a.grading.iter().chain(&a.grading).copied().collect();
        SuperMatrix::from_fn(a.gens, &grading, |i, j| {
            let m = match (i < h, j < h) {
                (true, true) => a,
                (true, false) => b,
                (false, true) => c,
                (false, false) => d,
            };
            m.get(i % h, j % h).clone()
        })
    }

    /// Block-diagonal matrix `diag(blocks)`.
    pub fn block_diag(blocks: &[Self]) -> Self {
        let first = blocks.first().expect("at least one block");
        let grading: Vec<Grade> = blocks.iter().flat_map(|b| b.grading.iter().copied()).collect();
        let mut out = Self::zeros(first.gens, &grading);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.gens, first.gens, "generator count mismatch");
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    out.set(off + i, off + j, b.get(i, j).clone());
                }
            }
            off += b.dim();
        }
        out
    }

    /// Diagonal blocks of size `size`.
    pub fn diagonal_blocks(&self, size: usize) -> Vec<Self> {
        assert!(size > 0 && self.dim() % size == 0);
        (0..self.dim() / size)
            .map(|b| {
                let o = b * size;
                SuperMatrix::from_fn(self.gens, &self.grading[o..o + size], |i, j| self.get(o + i, o + j).clone())
            })
            .collect()
    }

    /// `1_n ⊗ self`: `n` copies along the diagonal.
    pub fn repeat_diag(&self, n: usize) -> Self {
        Self::block_diag(&vec![self.clone(); n])
    }

    /// `U ⊗ 1`: a numeric matrix acting on an outer index, identity on the
    /// inner grading `inner`.
    pub fn outer_numeric(gens: usize, u: &Mat<Complex<T>>, inner: &[Grade]) -> Self {
        assert!(u.is_square());
        let s = inner.len();
        let grading: Vec<Grade> = (0..u.rows()).flat_map(|_| inner.iter().copied()).collect();
        SuperMatrix::from_fn(gens, &grading, |i, j| {
            if i % s == j % s {
                Grassmann::scalar(gens, u[(i / s, j / s)])
            } else {
                Grassmann::zero(gens)
            }
        })
    }

    /// Conjugate transpose of a purely numeric matrix.
    pub fn numeric_adjoint(&self) -> Result<Self> {
        if self.soul().entries.iter().any(|e| !e.is_zero()) {
            return Err(Error::InvalidArgument("adjoint of a matrix with nilpotent entries".into()));
        }
        let adj = self.body().adjoint();
        Ok(Self::from_numeric(self.gens, &self.grading, &adj))
    }

    /// Grading signs `(−1)^{grade i}` as a diagonal matrix.
    pub fn grading_sign(gens: usize, grading: &[Grade]) -> Self {
        let vals: Vec<Complex<T>> = grading
            .iter()
            .map(|g| if g.bit() == 0 { Complex::one() } else { -Complex::<T>::one() })
            .collect();
        Self::diag(gens, grading, &vals)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Same matrix over a larger generator set.
    pub fn embed(&self, gens: usize) -> Self {
        SuperMatrix {
            gens,
            grading: self.grading.clone(),
            entries: self.entries.iter().map(|e| e.embed(gens)).collect(),
        }
    }

    pub fn entries(&self) -> &[Grassmann<T>] {
        &self.entries
    }
}

/// `(B, F)` grading of one superspace block.
pub fn superspace_grading() -> Vec<Grade> {
    vec![Grade::Boson, Grade::Fermion]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    type M = SuperMatrix<f64>;

    fn random4(seed: u64, radius: f64) -> M {
        let g = [Grade::Boson, Grade::Fermion, Grade::Boson, Grade::Fermion];
        M::random(4, &g, radius, 0.4, &mut rng_from_seed(seed))
    }

    #[test]
    fn random_is_consistently_graded() {
        assert!(random4(1, 0.5).is_even());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = random4(2, 0.3).one_plus();
        let inv = m.inverse().unwrap();
        let id = M::identity(4, m.grading());
        assert!(m.matmul(&inv).max_abs_diff(&id) < 1e-12);
        assert!(inv.matmul(&m).max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn supertrace_is_cyclic() {
        let a = random4(3, 1.0);
        let b = random4(4, 1.0);
        let d = a.matmul(&b).str().max_abs_diff(&b.matmul(&a).str());
        assert!(d < 1e-12, "{d}");
        // the ordinary trace is not
        assert!(a.matmul(&b).trace().max_abs_diff(&b.matmul(&a).trace()) > 1e-6);
    }

    #[test]
    fn inverse_square_root_squares_back() {
        let x = random4(5, 0.2);
        let s = x.inv_sqrt_one_minus().unwrap();
        let back = s.matmul(&s).matmul(&x.one_minus());
        assert!(back.max_abs_diff(&M::identity(4, x.grading())) < 1e-12);
    }

    #[test]
    fn supertrace_log_is_log_superdeterminant_additive() {
        let a = random4(6, 0.2);
        let b = random4(7, 0.2);
        // ln((1−A)(1−B)) = ln(1 − (A + B − AB))
        let prod = a.add(&b).sub(&a.matmul(&b));
        let lhs = prod.ln_one_minus().unwrap().str();
        let rhs = &a.ln_one_minus().unwrap().str() + &b.ln_one_minus().unwrap().str();
        assert!(lhs.max_abs_diff(&rhs) < 1e-11);
    }

    #[test]
    fn large_body_requires_rescale() {
        let x = M::identity(4, &[Grade::Boson; 4]);
        assert!(matches!(x.ln_one_minus(), Err(Error::RescaleRequired { .. })));
    }

    #[test]
    fn quadrants_roundtrip() {
        let m = random4(8, 1.0);
        let [a, b, c, d] = m.quadrants();
        assert_eq!(M::from_quadrants(&a, &b, &c, &d), m);
    }
}
