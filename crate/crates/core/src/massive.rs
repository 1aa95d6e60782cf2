//! Exact evaluation of massive-mode quantities and their decay with the
//! number of bonds.
//!
//! Every function takes exact `W⁽ⁿ⁾` matrices and returns the exact value
//! together with the order-of-magnitude estimate built from the gap `a`
//! and the dimension `2B`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::perron::{GapReport, PfResolvent, WMatrix};
use crate::rng::rng_from_seed;
use crate::scalar::Real;
use crate::scattering::PropagationMatrix;

/// Named boolean outcome attached to a report.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: f64,
}

/// Exact value(s) next to their estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<T> {
    pub quantity: &'static str,
    pub values: Vec<T>,
    pub estimate: T,
    /// `values[0] / estimate`.
    pub ratio: T,
    pub two_b: usize,
    pub gap: T,
    pub checks: Vec<Check>,
    pub provenance: String,
}

impl<T: Real> EstimateReport<T> {
    fn new(quantity: &'static str, values: Vec<T>, estimate: T, two_b: usize, gap: T) -> Self {
        let ratio = values.first().map_or(T::nan(), |&v| v / estimate);
        Self { quantity, values, estimate, ratio, two_b, gap, checks: Vec::new(), provenance: String::new() }
    }

    fn check(mut self, name: &'static str, passed: bool, detail: T) -> Self {
        self.checks.push(Check { name, passed, detail: detail.as_f64() });
        self
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = p.into();
        self
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn diag<T: Real>(w: &Mat<T>) -> Vec<T> {
    w.diagonal()
}

/// Mean diagonal element of `W`, cross-checked against the spectrum.
pub fn diag_w_average<T: Real>(w: &WMatrix<T>, spectrum: &GapReport<T>) -> Result<EstimateReport<T>> {
    let n = w.dim();
    let nt = T::count(n);
    let avg = w.matrix().trace() / nt;
    let mut rep = EstimateReport::new("diag_w_average", vec![avg], spectrum.gap.recip(), n, spectrum.gap);
    if let Some(sum) = spectrum.resolvent_power_sum(1) {
        let diff = (avg - sum.re / nt).abs();
        if diff > T::lit(1e-8) || sum.im.abs() / nt > T::lit(1e-9) {
            return Err(Error::SpectralInconsistency(format!(
                "mean diagonal {} vs spectral {} (imag {})",
                avg.as_f64(),
                (sum.re / nt).as_f64(),
                sum.im.as_f64()
            )));
        }
        rep = rep.check("spectral-cross-check", true, diff);
    }
    let bound = spectrum.gap.recip();
    Ok(rep.check("positive", avg > T::zero(), avg).check("bounded-by-inverse-gap", avg <= bound, bound - avg))
}

/// Mean, rms and max of the off-diagonal elements of `W`.
pub fn offdiag_w_stats<T: Real>(w: &WMatrix<T>, gap: T) -> EstimateReport<T> {
    let n = w.dim();
    let m = w.matrix();
    let (mut sum, mut sq, mut max) = (T::zero(), T::zero(), T::zero());
    for i in 0..n {
        for (j, &x) in m.row(i).iter().enumerate() {
            if i != j {
                sum += x;
                sq += x * x;
                max = max.max(x.abs());
            }
        }
    }
    let count = T::count(n * (n - 1)).max(T::one());
    let mean = sum / count;
    let rms = (sq / count).sqrt();
    let mean_diag = m.trace() / T::count(n);
    let predicted = -mean_diag / T::count(n - 1).max(T::one());
    let estimate = (T::count(n) * gap).recip();
    let mut rep = EstimateReport::new("offdiag_w_stats", vec![mean, rms, max], estimate, n, gap)
        .check("mean-identity", (mean - predicted).abs() <= T::lit(1e-10), (mean - predicted).abs())
        .check("zero-row-sums", w.row_sum_defect() <= T::lit(1e-9), w.row_sum_defect());
    rep.ratio = rms / estimate;
    rep
}

/// Distribution of sampled chain products against the chain estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<T> {
    pub order: usize,
    pub samples: usize,
    /// `|exact / estimate|` per sample, in sampling order.
    pub ratios: Vec<T>,
    pub median_abs_ratio: T,
    /// Fraction of samples whose exact value has the sign of the estimate.
    pub sign_agreement: T,
    /// `max |Σ_{μ₂} W_{μ₁μ₂}W_{μ₂μ₃} − W⁽²⁾_{μ₁μ₃}|`.
    pub interior_sum_defect: T,
}

/// Samples tuples `(μ₁ … μ_{n+1})` and compares `∏ W_{μᵢμᵢ₊₁}` with
/// `(δ_{μ₁μ_{n+1}} − 1/(2B)) / (aⁿ (2B)ⁿ⁻¹)`. Every other sample is closed.
pub fn chain_product_check<T: Real>(res: &PfResolvent<T>, order: usize, samples: usize, seed: u64) -> Result<ChainReport<T>> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("chain order must be >= 2, got {order}")));
    }
    let ws = res.w_series(2)?;
    let (w, w2) = (ws[0].matrix(), ws[1].matrix());
    let n = w.rows();
    let nt = T::count(n);
    let a = res.gap();
    let scale = (a.powi(order as i32) * nt.powi(order as i32 - 1)).recip();
    let mut rng = rng_from_seed(seed);
    let mut ratios = Vec::with_capacity(samples);
    let mut agree = 0usize;
    let mut idx = vec![0usize; order + 1];
    for s in 0..samples {
        for x in idx.iter_mut() {
            *x = rng.gen_range(0..n);
        }
        if s % 2 == 0 {
            idx[order] = idx[0];
        }
        let exact: T = idx.windows(2).map(|p| w[(p[0], p[1])]).fold(T::one(), |acc, x| acc * x);
        let delta = if idx[0] == idx[order] { T::one() } else { T::zero() };
        let estimate = (delta - nt.recip()) * scale;
        ratios.push((exact / estimate).abs());
        if (exact >= T::zero()) == (estimate >= T::zero()) {
            agree += 1;
        }
    }
    let interior_sum_defect = w.matmul(w).max_abs_diff(w2);
    Ok(ChainReport {
        order,
        samples,
        median_abs_ratio: median(&ratios),
        ratios,
        sign_agreement: T::count(agree) / T::count(samples.max(1)),
        interior_sum_defect,
    })
}

fn median<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::nan();
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) * T::lit(0.5)
    }
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
}

impl<T: Real> Histogram<T> {
    pub fn new(values: &[T], bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = values.iter().copied().fold(T::infinity(), T::min);
        let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
        let (lo, hi) = if values.is_empty() { (T::zero(), T::one()) } else { (lo, hi) };
        let width = if hi > lo { (hi - lo) / T::count(bins) } else { T::one() };
        let edges = (0..=bins).map(|k| lo + width * T::count(k)).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let k = ((v - lo) / width).to_usize().unwrap_or(0).min(bins - 1);
            counts[k] += 1;
        }
        Self { edges, counts }
    }
}

/// Magnitude profile of `𝓑` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeReport<T> {
    pub two_b: usize,
    /// `max_μ |Σ_ν |𝓑_{μν}|² − 1|`.
    pub row_sum_defect: T,
    /// Mean over rows of `(1/2B) Σ_ν (2B)|𝓑_{μν}|²`; one by unitarity.
    pub mean_scaled: T,
    pub histogram: Histogram<T>,
    pub nonzero_fraction: T,
    /// `log max(2B|𝓑|²) / log 2B`: zero for a flat matrix, one for a permutation.
    pub flatness_exponent: T,
}

/// Compares `|𝓑_{μν}|²` with the flat value `1/(2B)`.
pub fn b_magnitude_stats<T: Real>(bcal: &PropagationMatrix<T>) -> MagnitudeReport<T> {
    let n = bcal.dim();
    let nt = T::count(n);
    let f = bcal.matrix().norm_sqr_entries();
    let row_sum_defect = f.row_sums().into_iter().map(|s| (s - T::one()).abs()).fold(T::zero(), T::max);
    let mean_scaled = f.row_sums().into_iter().sum::<T>() / nt;
    let cutoff = T::epsilon() * T::lit(16.0);
    let scaled: Vec<T> = f.as_slice().iter().filter(|&&x| x > cutoff).map(|&x| x * nt).collect();
    let max = scaled.iter().copied().fold(T::zero(), T::max);
    let flatness_exponent = if n > 1 { max.ln() / nt.ln() } else { T::zero() };
    MagnitudeReport {
        two_b: n,
        row_sum_defect,
        mean_scaled,
        nonzero_fraction: T::count(scaled.len()) / (nt * nt),
        histogram: Histogram::new(&scaled, 10),
        flatness_exponent,
    }
}

/// Source term `T(B) = (1/B²) Σ_{μν} W_{μν}W_{νμ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm<T> {
    pub bonds: usize,
    pub value: T,
    /// `2B / (B² a²)`.
    pub bound: T,
    /// Difference between the elementwise and the `Tr(W⁽²⁾)` forms.
    pub form_defect: T,
    /// Difference from `Σ_{k≥2} (1 − λ_k)⁻² / B²` when a dense spectrum is supplied.
    pub spectral_defect: Option<T>,
    /// `max_μ |Σ_ν W_{μν}W_{νμ}|`.
    pub max_row_pair_sum: T,
}

/// Evaluates `T(B)`. `w2` must be `W⁽²⁾` of the same operator.
pub fn source_term_value<T: Real>(w: &WMatrix<T>, w2: &WMatrix<T>, gap: &GapReport<T>) -> Result<SourceTerm<T>> {
    if w.order() != 1 || w2.order() != 2 || w.dim() != w2.dim() {
        return Err(Error::InvalidArgument("source term needs W and W⁽²⁾ of equal dimension".into()));
    }
    let m = w.matrix();
    let n = m.rows();
    let bonds = n / 2;
    let b2 = T::count(bonds * bonds);
    let row_pairs: Vec<T> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * m[(j, i)]).sum()).collect();
    let elementwise: T = row_pairs.iter().copied().sum();
    let value = elementwise / b2;
    let form_defect = (elementwise - w2.matrix().trace()).abs() / b2;
    let spectral_defect = gap.resolvent_power_sum(2).map(|s| (s.re - elementwise).abs() / b2);
    Ok(SourceTerm {
        bonds,
        value,
        bound: T::count(n) / (b2 * gap.gap * gap.gap),
        form_defect,
        spectral_defect,
        max_row_pair_sum: row_pairs.iter().map(|x| x.abs()).fold(T::zero(), T::max),
    })
}

/// Largest singular value of `W` by power iteration on `WᵀW`.
pub fn operator_norm<T: Real>(w: &Mat<T>, iterations: usize) -> T {
    let n = w.cols();
    let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(0.01) * T::count(i % 7)).collect();
    let mut sigma = T::zero();
    for _ in 0..iterations.max(1) {
        let y = w.matvec(&x);
        let z = w.vecmat(&y);
        let norm = z.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        sigma = norm.sqrt() / x.iter().map(|v| *v * *v).sum::<T>().sqrt().sqrt();
        x = z.into_iter().map(|v| v / norm).collect();
    }
    sigma
}

/// Fixed higher-order contraction sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HigherOrderCase {
    /// One extra trace with `n₁ = 2`: two sums.
    M1n2,
    /// Two extra traces with `n₁ = n₂ = 2`: six sums.
    M2n22,
}

fn hadamard_t<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    Mat::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * b[(j, i)])
}

fn quad<T: Real>(x: &[T], m: &Mat<T>, y: &[T]) -> T {
    (0..m.rows()).map(|i| x[i] * m.row(i).iter().zip(y).map(|(a, b)| *a * *b).sum::<T>()).sum()
}

fn total<T: Real>(m: &Mat<T>) -> T {
    m.as_slice().iter().copied().sum()
}

/// Exact values of the sums for `case`, each with the `1/B²` prefactor.
///
/// `ws` holds `W⁽¹⁾, W⁽²⁾, W⁽³⁾` in order.
pub fn higher_order_values<T: Real>(ws: &[WMatrix<T>], case: HigherOrderCase) -> Result<Vec<T>> {
    if ws.len() < 3 || ws.iter().take(3).enumerate().any(|(k, w)| w.order() != k + 1) {
        return Err(Error::InvalidArgument("need W⁽¹⁾, W⁽²⁾, W⁽³⁾".into()));
    }
    let (w1, w2, w3) = (ws[0].matrix(), ws[1].matrix(), ws[2].matrix());
    let n = w1.rows();
    let pre = T::count((n / 2) * (n / 2)).recip();
    let (d1, d2, d3) = (diag(w1), diag(w2), diag(w3));
    let values = match case {
        HigherOrderCase::M1n2 => vec![
            d3.iter().zip(&d1).map(|(a, b)| *a * *b).sum::<T>(),
            d2.iter().map(|a| *a * *a).sum::<T>(),
        ],
        HigherOrderCase::M2n22 => {
            let ww = hadamard_t(w1, w1); // W_ρτ W_τρ
            let w2w2 = hadamard_t(w2, w2);
            vec![
                quad(&d3, &ww, &d1),
                // Σ W⁽³⁾_τρ (W_ρτ)² W_τρ
                total(&Mat::from_fn(n, n, |t, r| w3[(t, r)] * w1[(r, t)] * w1[(r, t)] * w1[(t, r)])),
                // Σ W⁽³⁾_τρ W_ρτ W_ρρ W_ττ
                quad(&d1, &hadamard_t(w3, w1), &d1),
                total(&w2w2.hadamard(&ww)),
                quad(&d2, &ww, &d2),
                quad(&d1, &w2w2, &d1),
            ]
        }
    };
    Ok(values.into_iter().map(|v| v * pre).collect())
}

/// `(size, value)` pairs with a least-squares log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries<T> {
    pub points: Vec<(usize, T)>,
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual of the fit in log space.
    pub residual: T,
    /// True when every value had the same sign as the first one.
    pub sign_consistent: bool,
}

/// Minimum number of sizes entering a fit.
pub const MIN_FIT_SIZES: usize = 4;

impl<T: Real> ScalingSeries<T> {
    /// Fits `log|value|` against `log size` after dropping the smallest size.
    pub fn fit(points: Vec<(usize, T)>) -> Result<Self> {
        let mut sorted = points.clone();
        sorted.sort_by_key(|p| p.0);
        let used = &sorted[1.min(sorted.len())..];
        if used.len() < MIN_FIT_SIZES {
            return Err(Error::InvalidArgument(format!(
                "need at least {} sizes after dropping the smallest, got {}",
                MIN_FIT_SIZES,
                used.len()
            )));
        }
        if used.iter().any(|p| p.1 == T::zero() || !p.1.is_finite()) {
            return Err(Error::InvalidArgument("scaling values must be finite and non-zero".into()));
        }
        let xs: Vec<T> = used.iter().map(|p| T::count(p.0).ln()).collect();
        let ys: Vec<T> = used.iter().map(|p| p.1.abs().ln()).collect();
        let (slope, intercept) = least_squares(&xs, &ys);
        let k = T::count(xs.len());
        let residual = (xs.iter().zip(&ys).map(|(x, y)| (*y - slope * *x - intercept).powi(2)).sum::<T>() / k).sqrt();
        let s0 = points.first().map_or(true, |p| p.1 >= T::zero());
        let sign_consistent = points.iter().all(|p| (p.1 >= T::zero()) == s0);
        Ok(Self { points, slope, intercept, residual, sign_consistent })
    }
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn least_squares<T: Real>(xs: &[T], ys: &[T]) -> (T, T) {
    let k = T::count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / k;
    let my = ys.iter().copied().sum::<T>() / k;
    let sxy: T = xs.iter().zip(ys).map(|(x, y)| (*x - mx) * (*y - my)).sum();
    let sxx: T = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
