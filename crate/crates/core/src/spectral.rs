//! Spectral form factor of the phase-averaged quantum map and its
//! circular-unitary reference.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::BondLengths;
use crate::linalg::Mat;
use crate::rng::derive_seed;
use crate::scalar::Real;
use crate::scattering::{MagneticPhases, PropagationMatrix, QuantumMap};

/// `K(n)` for `n = 1..=n_max` with Monte-Carlo standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFactorCurve<T> {
    pub n: Vec<usize>,
    pub k: Vec<T>,
    pub stderr: Vec<T>,
    pub samples: usize,
    pub two_b: usize,
    pub seed: u64,
}

impl<T: Real> FormFactorCurve<T> {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// `K(n)`, if `n` is on the curve.
    pub fn at(&self, n: usize) -> Option<T> {
        self.n.iter().position(|&m| m == n).map(|i| self.k[i])
    }
}

/// `Σ_{ab} X_{ab} Y_{ba} = Tr(XY)` in fixed row order.
fn trace_of_product<T: Real>(x: &Mat<Complex<T>>, y: &Mat<Complex<T>>) -> Complex<T> {
    let n = x.rows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for a in 0..n {
        for (b, &xab) in x.row(a).iter().enumerate() {
            acc += xab * y[(b, a)];
        }
    }
    acc
}

/// `Tr Uⁿ` for `n = 1..=n_max`, from running powers up to `⌈n_max/2⌉`.
pub fn power_traces<T: Real>(u: &QuantumMap<T>, n_max: usize) -> Vec<Complex<T>> {
    let csr = u.to_csr();
    let dim = u.matrix().rows();
    let mut traces = vec![Complex::new(T::zero(), T::zero()); n_max];
    let mut prev = Mat::identity(dim);
    let mut cur = u.matrix().clone();
    let mut m = 1;
    loop {
        // Tr U^{2m−1} = Tr(U^m U^{m−1}), Tr U^{2m} = Tr(U^m U^m)
        let odd = 2 * m - 1;
        if odd > n_max {
            break;
        }
        traces[odd - 1] = if m == 1 { cur.trace() } else { trace_of_product(&cur, &prev) };
        let even = 2 * m;
        if even > n_max {
            break;
        }
        traces[even - 1] = trace_of_product(&cur, &cur);
        if 2 * m + 1 > n_max {
            break;
        }
        let next = csr.mul_dense(&cur);
        prev = cur;
        cur = next;
        m += 1;
    }
    traces
}

/// `K(n) = ⟨|Tr Uⁿ|²⟩ / 2B` over independent uniform phases on every
/// directed bond, at wavenumber zero. Sample `s` uses the seed
/// `derive_seed(seed, s)`; samples are reduced in index order.
pub fn form_factor<T: Real>(
    bcal: &PropagationMatrix<T>,
    lengths: &BondLengths<T>,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<FormFactorCurve<T>> {
    if samples == 0 || n_max == 0 {
        return Err(Error::InvalidArgument("form factor needs samples >= 1 and n_max >= 1".into()));
    }
    let two_b = bcal.dim();
    let norm = T::count(two_b);
    let per_sample: Vec<Vec<T>> = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<Vec<T>> {
            let phases = MagneticPhases::sample(two_b, derive_seed(seed, s as u64));
            let u = QuantumMap::new(bcal, lengths, &phases, T::zero())?;
            Ok(power_traces(&u, n_max).into_iter().map(|t| t.norm_sqr() / norm).collect())
        })
        .collect::<Result<_>>()?;

    let count = T::count(samples);
    let mut mean = vec![T::zero(); n_max];
    for row in &per_sample {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= count;
    }
    let mut var = vec![T::zero(); n_max];
    if samples > 1 {
        for row in &per_sample {
            for ((v, &x), &m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
    }
    let stderr = var
        .into_iter()
        .map(|v| {
            if samples > 1 {
                (v / T::count(samples - 1) / count).sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(FormFactorCurve {
        n: (1..=n_max).collect(),
        k: mean,
        stderr,
        samples,
        two_b,
        seed,
    })
}

/// Circular unitary ensemble form factor `min(n, N)/N`.
pub fn cue_reference<T: Real>(n: usize, dim: usize) -> T {
    T::count(n.min(dim)) / T::count(dim)
}

/// Exact phase average of `|Tr U|²/2B`: only diagonal terms survive.
pub fn first_order_average<T: Real>(bcal: &PropagationMatrix<T>) -> T {
    let m = bcal.matrix();
    m.diagonal().iter().map(|z| z.norm_sqr()).sum::<T>() / T::count(m.rows())
}

/// Mean `|K(n) − reference(n)|` over `n_lo ≤ n ≤ n_hi`.
pub fn deviation<T: Real>(
    curve: &FormFactorCurve<T>,
    reference: impl Fn(usize) -> T,
    n_lo: usize,
    n_hi: usize,
) -> Result<T> {
    let (sum, count) = curve
        .n
        .iter()
        .zip(&curve.k)
        .filter(|(&n, _)| n >= n_lo && n <= n_hi)
        .fold((T::zero(), 0usize), |(s, c), (&n, &k)| (s + (k - reference(n)).abs(), c + 1));
    if count == 0 {
        return Err(Error::InvalidArgument(format!("empty window [{n_lo}, {n_hi}]")));
    }
    Ok(sum / T::count(count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::VertexKind;

    fn k4() -> (PropagationMatrix<f64>, BondLengths<f64>) {
        let b = PropagationMatrix::complete(4, VertexKind::Dft).unwrap();
        let l = BondLengths::sample(6, 1.0, 2.0, 1).unwrap();
        (b, l)
    }

    #[test]
    fn cue_examples() {
        assert_eq!(cue_reference::<f64>(1, 12), 1.0 / 12.0);
        assert_eq!(cue_reference::<f64>(12, 12), 1.0);
        assert_eq!(cue_reference::<f64>(24, 12), 1.0);
    }

    #[test]
    fn traces_match_direct_powers() {
        let (b, l) = k4();
        let phases = MagneticPhases::sample(12, 3);
        let u = QuantumMap::new(&b, &l, &phases, 0.0).unwrap();
        let t = power_traces(&u, 9);
        let mut p = Mat::identity(12);
        for (i, &ti) in t.iter().enumerate() {
            p = p.matmul(u.matrix());
            assert!((p.trace() - ti).norm() < 1e-12, "n = {}", i + 1);
        }
    }

    #[test]
    fn deviation_examples() {
        let curve = FormFactorCurve {
            n: vec![1, 2, 3],
            k: vec![0.5, 0.6, 0.7],
            stderr: vec![0.0; 3],
            samples: 1,
            two_b: 2,
            seed: 0,
        };
        assert_eq!(deviation(&curve, |n| curve.k[n - 1], 1, 3).unwrap(), 0.0);
        let d = deviation(&curve, |n| curve.k[n - 1] - 0.25, 1, 3).unwrap();
        assert!((d - 0.25f64).abs() < 1e-15);
        assert!(deviation(&curve, |_| 0.0, 5, 9).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (b, l) = k4();
        let a = form_factor(&b, &l, 20, 8, 11).unwrap();
        let c = form_factor(&b, &l, 20, 8, 11).unwrap();
        assert_eq!(a, c);
        assert!(a.k.iter().all(|&k| k >= 0.0));
    }

    #[test]
    fn saturates_at_long_times() {
        let (b, l) = k4();
        let curve = form_factor(&b, &l, 150, 300, 5).unwrap();
        let tail = deviation(&curve, |_| 1.0, 48, 150).unwrap();
        let mean: f64 = curve.k[47..].iter().sum::<f64>() / curve.k[47..].len() as f64;
        assert!((mean - 1.0).abs() < 0.1, "tail mean {mean}, deviation {tail}");
    }
}
