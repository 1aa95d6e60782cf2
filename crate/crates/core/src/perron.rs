//! Perron-Frobenius operator `𝓕 = |𝓑|²`, its spectral gap, and the deflated
//! resolvent powers `W⁽ⁿ⁾ = 𝓟(1 − 𝓕)⁻ⁿ𝓟`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, Csr, Lu, Mat};
use crate::scalar::Real;
use crate::scattering::PropagationMatrix;

/// Default lower bound on the gap below which no resolvent is formed.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-6;

const POWER_BUDGET: usize = 50_000;
const POWER_TOL: f64 = 1e-13;
const POWER_STABLE_STEPS: usize = 4;

/// Bistochastic classical transition matrix on the directed bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct PfOperator<T> {
    matrix: Mat<T>,
}

impl<T: Real> PfOperator<T> {
    pub fn from_propagation(bcal: &PropagationMatrix<T>) -> Result<Self> {
        Self::from_matrix(bcal.matrix().norm_sqr_entries())
    }

    /// Accepts any entrywise non-negative bistochastic matrix.
    pub fn from_matrix(matrix: Mat<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::InvalidArgument("operator must be square and non-empty".into()));
        }
        if matrix.as_slice().iter().any(|&x| x < T::zero()) {
            return Err(Error::InternalConsistency("negative transition probability".into()));
        }
        let f = Self { matrix };
        let defect = f.bistochastic_defect();
        if !(defect <= T::structural_tol()) {
            return Err(Error::InternalConsistency(format!(
                "operator not bistochastic: defect {:e}",
                defect.as_f64()
            )));
        }
        Ok(f)
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Largest deviation of any row or column sum from one.
    pub fn bistochastic_defect(&self) -> T {
        self.matrix
            .row_sums()
            .into_iter()
            .chain(self.matrix.col_sums())
            .map(|s| (s - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    /// `‖𝓕u₁ − u₁‖` for the normalised uniform vector.
    pub fn perron_residual(&self) -> T {
        let n = self.dim();
        let u = vec![T::count(n).sqrt().recip(); n];
        let fu = self.matrix.matvec(&u);
        fu.iter().zip(&u).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt()
    }

    /// Order-independent summary for report provenance.
    pub fn fingerprint(&self) -> String {
        let n = self.dim();
        let tr = self.matrix.trace().as_f64();
        let fro = self.matrix.frobenius_norm().as_f64();
        format!("pf:dim={n}:tr={tr:.12e}:fro={fro:.12e}")
    }

    /// `(𝓕 − J)x` with `J = |u₁⟩⟨u₁|`.
    fn deflated_apply(csr: &Csr<T>, x: &[T]) -> Vec<T> {
        let mean = x.iter().copied().sum::<T>() / T::count(x.len());
        csr.mul_vec(x).into_iter().map(|y| y - mean).collect()
    }
}

/// Algorithm used for the gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMethod {
    Dense,
    DeflatedPower,
}

impl GapMethod {
    pub fn tag(self) -> &'static str {
        match self {
            GapMethod::Dense => "dense",
            GapMethod::DeflatedPower => "deflated-power",
        }
    }
}

/// Leading and subleading spectral data of `𝓕`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport<T> {
    pub lambda_1: T,
    pub perron_residual: T,
    pub lambda_sub: T,
    pub gap: T,
    /// Full spectrum, dense method only. The Perron eigenvalue comes first.
    pub eigenvalues: Option<Vec<Complex<T>>>,
    pub method: GapMethod,
    pub iterations: usize,
}

impl<T: Real> GapReport<T> {
    /// Eigenvalues other than the Perron root.
    pub fn subleading(&self) -> Option<&[Complex<T>]> {
        self.eigenvalues.as_deref().map(|e| &e[1..])
    }

    /// `Σ_{k≥2} (1 − λ_k)^{-p}`, real part. Requires the dense spectrum.
    pub fn resolvent_power_sum(&self, p: i32) -> Option<Complex<T>> {
        let one = Complex::new(T::one(), T::zero());
        self.subleading().map(|ev| ev.iter().map(|&l| (one - l).powi(-p)).sum())
    }
}

pub fn spectral_gap<T: Real>(f: &PfOperator<T>, method: GapMethod) -> Result<GapReport<T>> {
    match method {
        GapMethod::Dense => dense_gap(f),
        GapMethod::DeflatedPower => power_gap(f),
    }
}

fn dense_gap<T: Real>(f: &PfOperator<T>) -> Result<GapReport<T>> {
    let mut ev = eigenvalues(f.matrix())?;
    let one = Complex::new(T::one(), T::zero());
    let lead = (0..ev.len())
        .min_by(|&i, &j| (ev[i] - one).norm().partial_cmp(&(ev[j] - one).norm()).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty spectrum");
    let l1 = ev.remove(lead);
    if (l1 - one).norm() > T::lit(1e-10) {
        return Err(Error::SpectralInconsistency(format!("leading eigenvalue {l1} is not 1")));
    }
    let lambda_sub = ev.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    ev.insert(0, l1);
    Ok(GapReport {
        lambda_1: l1.re,
        perron_residual: f.perron_residual(),
        lambda_sub,
        gap: (T::one() - lambda_sub).max(T::zero()),
        eigenvalues: Some(ev),
        method: GapMethod::Dense,
        iterations: 0,
    })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Modulus of the dominant eigenvalue seen in two successive steps `x → y1 → y2`.
///
/// A single-root fit handles real dominant eigenvalues; otherwise the
/// two-term recurrence `y2 + p y1 + q x ≈ 0` resolves a complex pair or `±λ`.
fn dominant_modulus<T: Real>(x: &[T], y1: &[T], y2: &[T]) -> T {
    let xx = dot(x, x);
    let lam = dot(y1, x) / xx;
    let r1: T = y1.iter().zip(x).map(|(a, b)| (*a - lam * *b) * (*a - lam * *b)).sum::<T>().sqrt();
    if r1 <= T::lit(1e-10) * dot(y1, y1).sqrt().max(T::min_positive_value()) {
        return lam.abs();
    }
    let (a11, a12, a22) = (dot(y1, y1), dot(y1, x), xx);
    let (c1, c2) = (-dot(y1, y2), -dot(x, y2));
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= T::epsilon() * a11 * a22 {
        return (dot(y2, y2) / xx).sqrt().sqrt();
    }
    let p = (c1 * a22 - c2 * a12) / det;
    let q = (a11 * c2 - a12 * c1) / det;
    let disc = p * p - T::lit(4.0) * q;
    if disc < T::zero() {
        q.abs().sqrt()
    } else {
        let s = disc.sqrt();
        let half = T::lit(0.5);
        ((-p + s) * half).abs().max(((-p - s) * half).abs())
    }
}

fn power_gap<T: Real>(f: &PfOperator<T>) -> Result<GapReport<T>> {
    let n = f.dim();
    let csr = Csr::from_dense(f.matrix());
    let lambda_1 = {
        let u = vec![T::count(n).sqrt().recip(); n];
        dot(&u, &f.matrix().matvec(&u))
    };
    // deterministic start with no component along the uniform vector
    let mut x: Vec<T> = (0..n).map(|i| T::lit(((i * 7919 + 13) % 101) as f64 / 101.0 - 0.5)).collect();
    let mean = x.iter().copied().sum::<T>() / T::count(n);
    x.iter_mut().for_each(|v| *v -= mean);
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);

    let report = |sub: T, its: usize| GapReport {
        lambda_1,
        perron_residual: f.perron_residual(),
        lambda_sub: sub,
        gap: (T::one() - sub).max(T::zero()),
        eigenvalues: None,
        method: GapMethod::DeflatedPower,
        iterations: its,
    };

    let tol = T::lit(POWER_TOL);
    let mut prev = T::nan();
    let mut stable = 0;
    let mut est = T::zero();
    let mut delta = T::infinity();
    for it in 1..=POWER_BUDGET {
        let y1 = PfOperator::deflated_apply(&csr, &x);
        let n1 = dot(&y1, &y1).sqrt();
        if n1 <= T::lit(1e-300).max(T::min_positive_value()) {
            return Ok(report(T::zero(), it));
        }
        let y2 = PfOperator::deflated_apply(&csr, &y1);
        est = dominant_modulus(&x, &y1, &y2);
        delta = (est - prev).abs();
        if delta <= tol * est.max(T::one()) {
            stable += 1;
            if stable >= POWER_STABLE_STEPS {
                return Ok(report(est, it));
            }
        } else {
            stable = 0;
        }
        prev = est;
        let n2 = dot(&y2, &y2).sqrt();
        if n2 <= T::lit(1e-300).max(T::min_positive_value()) {
            return Ok(report(est, it));
        }
        x = y2.into_iter().map(|v| v / n2).collect();
    }
    Err(Error::ConvergenceFailure { iterations: POWER_BUDGET, estimate: est.as_f64(), residual: delta.as_f64() })
}

/// Deflated resolvent of a gapped `𝓕`.
#[derive(Debug, Clone)]
pub struct PfResolvent<T> {
    operator: PfOperator<T>,
    lu: Lu<T>,
    gap: T,
}

impl<T: Real> PfResolvent<T> {
    /// Factorises `1 − 𝓕 + |u₁⟩⟨u₁|` after checking the default gap floor.
    pub fn new(operator: &PfOperator<T>, gap: &GapReport<T>) -> Result<Self> {
        Self::with_floor(operator, gap, T::lit(DEFAULT_GAP_FLOOR))
    }

    pub fn with_floor(operator: &PfOperator<T>, gap: &GapReport<T>, floor: T) -> Result<Self> {
        if !(gap.gap >= floor) {
            return Err(Error::IllConditionedResolvent { gap: gap.gap.as_f64(), floor: floor.as_f64() });
        }
        let n = operator.dim();
        let j = T::count(n).recip();
        let shifted = Mat::from_fn(n, n, |a, b| {
            let id = if a == b { T::one() } else { T::zero() };
            id - operator.matrix()[(a, b)] + j
        });
        let lu = Lu::factorize(&shifted)?;
        Ok(Self { operator: operator.clone(), lu, gap: gap.gap })
    }

    pub fn operator(&self) -> &PfOperator<T> {
        &self.operator
    }

    pub fn gap(&self) -> T {
        self.gap
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// `𝓟 = 1 − |u₁⟩⟨u₁|`.
    pub fn projector(&self) -> Mat<T> {
        let n = self.dim();
        let j = T::count(n).recip();
        Mat::from_fn(n, n, |a, b| if a == b { T::one() - j } else { -j })
    }

    /// `W⁽ⁿ⁾` for a single order.
    pub fn w_matrix(&self, order: usize) -> Result<WMatrix<T>> {
        self.w_series(order)?.pop().ok_or_else(|| Error::InvalidArgument("order must be >= 1".into()))
    }

    /// `W⁽¹⁾ … W⁽ᴺ⁾` by successive solves.
    pub fn w_series(&self, max_order: usize) -> Result<Vec<WMatrix<T>>> {
        if max_order == 0 {
            return Err(Error::InvalidArgument("order must be >= 1".into()));
        }
        let mut y = self.projector();
        let mut out = Vec::with_capacity(max_order);
        for order in 1..=max_order {
            y = self.lu.solve(&y);
            out.push(WMatrix { order, matrix: project_both(&y) });
        }
        Ok(out)
    }
}

/// `𝓟 A 𝓟`: removes row and column means.
fn project_both<T: Real>(a: &Mat<T>) -> Mat<T> {
    let n = a.rows();
    let nt = T::count(n);
    let rm: Vec<T> = a.row_sums().into_iter().map(|s| s / nt).collect();
    let cm: Vec<T> = a.col_sums().into_iter().map(|s| s / nt).collect();
    let total = rm.iter().copied().sum::<T>() / nt;
    Mat::from_fn(n, n, |i, j| a[(i, j)] - rm[i] - cm[j] + total)
}

/// `W⁽ⁿ⁾_{μν} = ⟨μ|𝓟(1 − 𝓕)⁻ⁿ𝓟|ν⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct WMatrix<T> {
    order: usize,
    matrix: Mat<T>,
}

impl<T: Real> WMatrix<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Largest absolute row or column sum.
    pub fn row_sum_defect(&self) -> T {
        self.matrix
            .row_sums()
            .into_iter()
            .chain(self.matrix.col_sums())
            .map(T::abs)
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::VertexKind;

    fn op(rows: &[Vec<f64>]) -> PfOperator<f64> {
        PfOperator::from_matrix(Mat::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn small_examples() {
        let b = PropagationMatrix::<f64>::complete(2, VertexKind::Dft).unwrap();
        let f = PfOperator::from_propagation(&b).unwrap();
        assert_eq!(f.matrix(), &Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap());
        let g = spectral_gap(&f, GapMethod::Dense).unwrap();
        assert!((g.lambda_sub - 1.0).abs() < 1e-14 && g.gap.abs() < 1e-14);
        let p = spectral_gap(&f, GapMethod::DeflatedPower).unwrap();
        assert!((p.lambda_sub - 1.0).abs() < 1e-12);

        let half = op(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        for m in [GapMethod::Dense, GapMethod::DeflatedPower] {
            let g = spectral_gap(&half, m).unwrap();
            assert!(g.lambda_sub.abs() < 1e-14 && (g.gap - 1.0).abs() < 1e-14);
            assert!((g.lambda_1 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn k3_entries_are_half() {
        let b = PropagationMatrix::<f64>::complete(3, VertexKind::Dft).unwrap();
        let f = PfOperator::from_propagation(&b).unwrap();
        for &x in f.matrix().as_slice() {
            assert!(x == 0.0 || (x - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_bistochastic() {
        let m = Mat::from_rows(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(PfOperator::from_matrix(m), Err(Error::InternalConsistency(_))));
    }

    #[test]
    fn rank_one_resolvent() {
        let f = op(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let g = spectral_gap(&f, GapMethod::Dense).unwrap();
        let r = PfResolvent::new(&f, &g).unwrap();
        let expect = Mat::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap();
        for w in r.w_series(4).unwrap() {
            assert!(w.matrix().max_abs_diff(&expect) < 1e-14);
        }
    }

    #[test]
    fn gapless_operator_refused() {
        let f = op(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let g = spectral_gap(&f, GapMethod::Dense).unwrap();
        assert!(matches!(PfResolvent::new(&f, &g), Err(Error::IllConditionedResolvent { .. })));
    }

    #[test]
    fn complete_graph_gap_and_trace() {
        let v = 6usize;
        let b = PropagationMatrix::<f64>::complete(v, VertexKind::Dft).unwrap();
        let f = PfOperator::from_propagation(&b).unwrap();
        let g = spectral_gap(&f, GapMethod::Dense).unwrap();
        let exact = (v as f64 - 2.0) / (v as f64 - 1.0);
        assert!((g.gap - exact).abs() < 1e-10, "{}", g.gap);
        let p = spectral_gap(&f, GapMethod::DeflatedPower).unwrap();
        assert!((p.lambda_sub - g.lambda_sub).abs() < 1e-9);

        let r = PfResolvent::new(&f, &g).unwrap();
        let ws = r.w_series(2).unwrap();
        let tr = g.resolvent_power_sum(1).unwrap();
        assert!((ws[0].matrix().trace() - tr.re).abs() < 1e-9 && tr.im.abs() < 1e-9);
        let w2 = ws[0].matrix().matmul(ws[0].matrix());
        assert!(w2.max_abs_diff(ws[1].matrix()) < 1e-10);
        assert!(ws[0].row_sum_defect() < 1e-12);
        // (1 − 𝓕) W = 𝓟
        let n = f.dim();
        let one_minus_f = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - f.matrix()[(i, j)]);
        assert!(one_minus_f.matmul(ws[0].matrix()).max_abs_diff(&r.projector()) < 1e-10);
    }
}
