//! Coset coordinates `(Z, Z̃)`, the fundamental form `Q = gΛg⁻¹`, the
//! Möbius action of the group, and numerical checks of the identities that
//! separate the zero mode from the massive modes.
//!
//! All objects are [`SuperMatrix`] values over a finite exterior algebra, so
//! every check compares full coefficient tables. Superspace blocks are
//! graded `(B, F)`; retarded/advanced blocks are stacked as `(B, F, B, F)`.

use num_complex::Complex;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{superspace_grading, Grade, Grassmann, SuperMatrix};
use crate::linalg::Mat;
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::scalar::{cis, Real};

/// Tolerance for identities that involve only finite series.
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Tolerance for identities evaluated through `STr ln` series.
pub const SERIES_TOL: f64 = 1e-9;

/// Body radius of each random entry of `Z`, `Z̃`, `ξ`, `ψ`.
const POINT_RADIUS: f64 = 0.2;
/// Soul coefficient scale of random entries.
const SOUL_SCALE: f64 = 0.3;
/// Distance of random group elements from the identity.
const GROUP_SPREAD: f64 = 0.2;
/// Samples on the circle used to extract the quadratic Taylor coefficient.
const TAYLOR_SAMPLES: usize = 16;
/// Radius of that circle.
const TAYLOR_RADIUS: f64 = 0.5;

/// How random coset points are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Independent coefficients everywhere.
    Generic,
    /// Bodies obey `Z̃_BB = Z_BB*` and `Z̃_FF = −Z_FF*`.
    Physical,
}

/// Pair `(Z, Z̃)` of 2×2 supermatrices in superspace.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetPoint<T> {
    z: SuperMatrix<T>,
    zt: SuperMatrix<T>,
}

impl<T: Real> CosetPoint<T> {
    /// Validates shape, grading and the domain conditions `|Z_BB| < 1`
    /// and an invertible body of `1 − ZZ̃`.
    pub fn new(z: SuperMatrix<T>, zt: SuperMatrix<T>) -> Result<Self> {
        let p = Self::from_parts(z, zt)?;
        if p.z.get(0, 0).body().norm() >= T::one() {
            return Err(Error::InvalidCosetPoint("|Z_BB| >= 1".into()));
        }
        let m = p.z.matmul(&p.zt).one_minus().body();
        if m.determinant().norm() <= T::epsilon() {
            return Err(Error::InvalidCosetPoint("1 - Z Z~ has singular body".into()));
        }
        Ok(p)
    }

    /// Structural checks only; used for intermediate values.
    fn from_parts(z: SuperMatrix<T>, zt: SuperMatrix<T>) -> Result<Self> {
        let grading = superspace_grading();
        for (name, m) in [("Z", &z), ("Z~", &zt)] {
            if m.grading() != grading.as_slice() {
                return Err(Error::InvalidCosetPoint(format!("{name} is not a (B, F) block")));
            }
            if !m.is_even() {
                return Err(Error::InvalidCosetPoint(format!("{name} has entries of the wrong parity")));
            }
        }
        if z.gens() != zt.gens() {
            return Err(Error::InvalidCosetPoint("generator counts differ".into()));
        }
        Ok(CosetPoint { z, zt })
    }

    pub fn origin(gens: usize) -> Self {
        let zero = SuperMatrix::zeros(gens, &superspace_grading());
        CosetPoint {
            z: zero.clone(),
            zt: zero,
        }
    }

    pub fn random(gens: usize, profile: Profile, rng: &mut Rng) -> Self {
        let grading = superspace_grading();
        let radius = T::lit(POINT_RADIUS);
        let soul = T::lit(SOUL_SCALE);
        let z = SuperMatrix::random(gens, &grading, radius, soul, rng);
        let mut zt = SuperMatrix::random(gens, &grading, radius, soul, rng);
        if profile == Profile::Physical {
            for (i, sign) in [(0, T::one()), (1, -T::one())] {
                let mut e = zt.get(i, i).clone();
                let delta = z.get(i, i).body().conj() * sign - e.body();
                e.add_assign_ref(&Grassmann::scalar(gens, delta));
                zt.set(i, i, e);
            }
        }
        Self::new(z, zt).expect("random point lies in the domain")
    }

    /// Purely nilpotent point.
    pub fn random_nilpotent(gens: usize, rng: &mut Rng) -> Self {
        let grading = superspace_grading();
        let soul = T::lit(SOUL_SCALE);
        let z = SuperMatrix::random(gens, &grading, T::zero(), soul, rng).soul();
        let zt = SuperMatrix::random(gens, &grading, T::zero(), soul, rng).soul();
        CosetPoint { z, zt }
    }

    pub fn z(&self) -> &SuperMatrix<T> {
        &self.z
    }

    pub fn zt(&self) -> &SuperMatrix<T> {
        &self.zt
    }

    pub fn gens(&self) -> usize {
        self.z.gens()
    }

    /// `(εZ, εZ̃)`.
    pub fn scaled(&self, eps: Complex<T>) -> Self {
        CosetPoint {
            z: self.z.scale(eps),
            zt: self.zt.scale(eps),
        }
    }

    fn deviation(&self, other: &Self) -> T {
        self.z.max_abs_diff(&other.z).max(self.zt.max_abs_diff(&other.zt))
    }
}

/// Outcome of one identity evaluated at one random point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    /// Largest deviation over all exterior-algebra coefficients.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: u64,
}

impl IdentityCheck {
    fn new<T: Real>(identity: &'static str, deviation: T, tolerance: f64) -> Self {
        let max_deviation = deviation.as_f64();
        IdentityCheck {
            identity,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
            seed: 0,
        }
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// `(B, F, B, F)`: retarded block followed by advanced block.
pub fn coset_grading() -> Vec<Grade> {
    let s = superspace_grading();
    s.iter().chain(&s).copied().collect()
}

/// `Λ = diag(1, 1, −1, −1)`.
pub fn lambda<T: Real>(gens: usize) -> SuperMatrix<T> {
    let one = Complex::one();
    SuperMatrix::diag(gens, &coset_grading(), &[one, one, -one, -one])
}

/// `σ₃ = diag(1, −1)` in superspace.
pub fn sigma3<T: Real>(gens: usize) -> SuperMatrix<T> {
    let one = Complex::one();
    SuperMatrix::diag(gens, &superspace_grading(), &[one, -one])
}

/// `g(Z)` with blocks `(1−ZZ̃)^{−1/2}`, `Z(1−Z̃Z)^{−1/2}`,
/// `Z̃(1−ZZ̃)^{−1/2}`, `(1−Z̃Z)^{−1/2}`.
pub fn build_g<T: Real>(p: &CosetPoint<T>) -> Result<SuperMatrix<T>> {
    let p = CosetPoint::new(p.z.clone(), p.zt.clone())?;
    let a = p.z.matmul(&p.zt).inv_sqrt_one_minus()?;
    let d = p.zt.matmul(&p.z).inv_sqrt_one_minus()?;
    let b = p.z.matmul(&d);
    let c = p.zt.matmul(&a);
    Ok(SuperMatrix::from_quadrants(&a, &b, &c, &d))
}

/// Explicit block form of `Q(Z, Z̃)`.
pub fn q_matrix<T: Real>(p: &CosetPoint<T>) -> Result<SuperMatrix<T>> {
    let zzt = p.z.matmul(&p.zt);
    let ztz = p.zt.matmul(&p.z);
    let r = zzt.one_minus().inverse()?;
    let s = ztz.one_minus().inverse()?;
    let two = Complex::from(T::lit(2.0));
    let a = zzt.one_plus().matmul(&r);
    let b = p.z.matmul(&s).scale(-two);
    let c = p.zt.matmul(&r).scale(two);
    let d = ztz.one_plus().matmul(&s).neg();
    Ok(SuperMatrix::from_quadrants(&a, &b, &c, &d))
}

/// `Z = B D⁻¹`, `Z̃ = C A⁻¹` from a group element.
pub fn local_coordinates<T: Real>(g: &SuperMatrix<T>) -> Result<CosetPoint<T>> {
    let [a, b, c, d] = g.quadrants();
    let z = b.matmul(&d.inverse()?);
    let zt = c.matmul(&a.inverse()?);
    CosetPoint::from_parts(z, zt)
}

/// `(aX + b)(d + cX)⁻¹`.
fn mobius<T: Real>(
    a: &SuperMatrix<T>,
    b: &SuperMatrix<T>,
    c: &SuperMatrix<T>,
    d: &SuperMatrix<T>,
    x: &SuperMatrix<T>,
) -> Result<SuperMatrix<T>> {
    let den = d
        .add(&c.matmul(x))
        .inverse()
        .map_err(|_| Error::ActionUndefined("denominator has singular body".into()))?;
    Ok(a.matmul(x).add(b).matmul(&den))
}

/// Blocks of `g₀` repeated over `copies` bond indices.
fn lifted_blocks<T: Real>(g0: &SuperMatrix<T>, copies: usize) -> [SuperMatrix<T>; 4] {
    g0.quadrants().map(|m| m.repeat_diag(copies))
}

/// `g₀·Z = (A₀Z + B₀)(D₀ + C₀Z)⁻¹`, `g₀·Z̃ = (D₀Z̃ + C₀)(A₀ + B₀Z̃)⁻¹`.
pub fn group_action<T: Real>(g0: &SuperMatrix<T>, p: &CosetPoint<T>) -> Result<CosetPoint<T>> {
    let [a, b, c, d] = g0.quadrants();
    let z = mobius(&a, &b, &c, &d, &p.z)?;
    let zt = mobius(&d, &c, &b, &a, &p.zt)?;
    CosetPoint::from_parts(z, zt)
}

/// Group action on bond-resolved matrices (possibly not bond-diagonal).
fn group_action_bonds<T: Real>(
    g0: &SuperMatrix<T>,
    z: &SuperMatrix<T>,
    zt: &SuperMatrix<T>,
    bonds: usize,
) -> Result<(SuperMatrix<T>, SuperMatrix<T>)> {
    let [a, b, c, d] = lifted_blocks(g0, bonds);
    Ok((mobius(&a, &b, &c, &d, z)?, mobius(&d, &c, &b, &a, zt)?))
}

/// `1 + spread·R` with `R` random and consistently graded.
pub fn random_group_element<T: Real>(gens: usize, rng: &mut Rng) -> SuperMatrix<T> {
    let spread = T::lit(GROUP_SPREAD);
    SuperMatrix::random(gens, &coset_grading(), spread, spread, rng).one_plus()
}

/// Haar-like random unitary on `n` bond indices, from Gram–Schmidt on
/// random complex columns.
pub fn random_bond_unitary<T: Real>(n: usize, rng: &mut Rng) -> Mat<Complex<T>> {
    use rand::Rng as _;
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex<T>> = (0..n)
            .map(|_| {
                let r = T::lit(rng.gen_range(0.1..1.0));
                cis(T::lit(rng.gen::<f64>()) * T::TAU()) * r
            })
            .collect();
        for u in &cols {
            let dot: Complex<T> = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= dot * ui;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        if norm > T::lit(1e-6) {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    Mat::from_fn(n, n, |i, j| cols[j][i])
}

/// Bond-resolved `(Z, Z̃)`: one superspace block per directed bond.
fn stack<T: Real>(points: &[CosetPoint<T>]) -> (SuperMatrix<T>, SuperMatrix<T>) {
    let z: Vec<_> = points.iter().map(|p| p.z.clone()).collect();
    let zt: Vec<_> = points.iter().map(|p| p.zt.clone()).collect();
    (SuperMatrix::block_diag(&z), SuperMatrix::block_diag(&zt))
}

/// `−STr ln(1 − ZZ̃) + STr ln(1 − 𝓑Z𝓑†Z̃)`.
pub fn bare_action<T: Real>(
    z: &SuperMatrix<T>,
    zt: &SuperMatrix<T>,
    bcal: &SuperMatrix<T>,
) -> Result<Grassmann<T>> {
    let first = z.matmul(zt).ln_one_minus()?.str();
    let bdag = bcal.numeric_adjoint()?;
    let second = SuperMatrix::product(&[bcal, z, &bdag, zt]).ln_one_minus()?.str();
    Ok(&second - &first)
}

/// Bare action in the variables `ψ`:
/// `STr ln(1 + ψψ̃) + STr ln(1 − 𝓑ψ(1+ψ̃ψ)^{−1/2}𝓑†ψ̃(1+ψψ̃)^{−1/2})`.
pub fn bare_action_psi<T: Real>(
    psi: &SuperMatrix<T>,
    psit: &SuperMatrix<T>,
    bcal: &SuperMatrix<T>,
) -> Result<Grassmann<T>> {
    let pp = psi.matmul(psit);
    let first = pp.ln_one_plus()?.str();
    let r = psit.matmul(psi).inv_sqrt_one_plus()?;
    let s = pp.inv_sqrt_one_plus()?;
    let bdag = bcal.numeric_adjoint()?;
    let inner = SuperMatrix::product(&[bcal, psi, &r, &bdag, psit, &s]);
    let second = inner.ln_one_minus()?.str();
    Ok(&first + &second)
}

fn lifted_bcal<T: Real>(gens: usize, bcal: &Mat<Complex<T>>) -> SuperMatrix<T> {
    SuperMatrix::outer_numeric(gens, bcal, &superspace_grading())
}

/// `Q = gΛg⁻¹` against the explicit block form, `Q² = 1`, and recovery of
/// the local coordinates from `g`.
pub fn verify_q_form<T: Real>(p: &CosetPoint<T>) -> Result<Vec<IdentityCheck>> {
    let gens = p.gens();
    let g = build_g(p)?;
    let lam = lambda(gens);
    let q = SuperMatrix::product(&[&g, &lam, &g.inverse()?]);
    let explicit = q_matrix(p)?;
    let id = SuperMatrix::identity(gens, &coset_grading());
    let back = local_coordinates(&g)?;
    Ok(vec![
        IdentityCheck::new("q-block-form", q.max_abs_diff(&explicit), ALGEBRAIC_TOL),
        IdentityCheck::new("q-squared", explicit.matmul(&explicit).max_abs_diff(&id), ALGEBRAIC_TOL),
        IdentityCheck::new("local-coordinates", back.deviation(p), ALGEBRAIC_TOL),
    ])
}

/// `(g₀g₁)·Z = g₀·(g₁·Z)` for both `Z` and `Z̃`.
pub fn verify_composition<T: Real>(
    g0: &SuperMatrix<T>,
    g1: &SuperMatrix<T>,
    p: &CosetPoint<T>,
) -> Result<Vec<IdentityCheck>> {
    let lhs = group_action(&g0.matmul(g1), p)?;
    let rhs = group_action(g0, &group_action(g1, p)?)?;
    Ok(vec![IdentityCheck::new("composition", lhs.deviation(&rhs), ALGEBRAIC_TOL)])
}

/// Invariance of the bare action under a bond-independent `g₀`, its
/// proviso `g₀·(𝓑Z𝓑†) = 𝓑(g₀·Z)𝓑†`, and independence of the
/// parametrization `ξ = A₀ζD₀⁻¹`.
pub fn verify_invariance<T: Real>(
    g0: &SuperMatrix<T>,
    points: &[CosetPoint<T>],
    bcal: &Mat<Complex<T>>,
) -> Result<Vec<IdentityCheck>> {
    let bonds = points.len();
    if bcal.rows() != bonds || !bcal.is_square() {
        return Err(Error::InvalidArgument(format!(
            "propagation matrix is {}x{}, expected {bonds}x{bonds}",
            bcal.rows(),
            bcal.cols()
        )));
    }
    let gens = g0.gens();
    let b = lifted_bcal(gens, bcal);
    let bdag = b.numeric_adjoint()?;
    let (z, zt) = stack(points);
    let (gz, gzt) = group_action_bonds(g0, &z, &zt, bonds)?;

    let after = {
        let head = gz.matmul(&gzt).ln_one_minus()?.str();
        let tail = SuperMatrix::product(&[&b, &gz, &bdag, &gzt]).ln_one_minus()?.str();
        &head - &tail
    };
    let before = {
        let head = z.matmul(&zt).ln_one_minus()?.str();
        let tail = SuperMatrix::product(&[&b, &z, &bdag, &zt]).ln_one_minus()?.str();
        &head - &tail
    };

    let mixed = SuperMatrix::product(&[&b, &z, &bdag]);
    let (g_mixed, _) = group_action_bonds(g0, &mixed, &zt, bonds)?;
    let mixed_after = SuperMatrix::product(&[&b, &gz, &bdag]);

    let bare_after = bare_action(&gz, &gzt, &b)?;
    let bare_before = bare_action(&z, &zt, &b)?;

    let [a0, _, _, d0] = lifted_blocks(g0, bonds);
    let xi = SuperMatrix::product(&[&a0, &z, &d0.inverse()?]);
    let xit = SuperMatrix::product(&[&d0, &zt, &a0.inverse()?]);
    let bare_xi = bare_action(&xi, &xit, &b)?;

    Ok(vec![
        IdentityCheck::new("invariance", after.max_abs_diff(&before), SERIES_TOL),
        IdentityCheck::new("invariance-proviso", g_mixed.max_abs_diff(&mixed_after), ALGEBRAIC_TOL),
        IdentityCheck::new("bare-action-invariance", bare_after.max_abs_diff(&bare_before), SERIES_TOL),
        IdentityCheck::new("bare-action-gauge", bare_xi.max_abs_diff(&bare_before), SERIES_TOL),
    ])
}

/// Zero mode `(Y, Ỹ) = (B₀D₀⁻¹, C₀A₀⁻¹)` of a group element.
pub fn zero_mode<T: Real>(g0: &SuperMatrix<T>) -> Result<CosetPoint<T>> {
    group_action(g0, &CosetPoint::origin(g0.gens()))
}

/// `(ξ, ξ̃) = (A₀ζD₀⁻¹, D₀ζ̃A₀⁻¹)`.
pub fn gauge_invariant<T: Real>(g0: &SuperMatrix<T>, zeta: &CosetPoint<T>) -> Result<CosetPoint<T>> {
    let [a0, _, _, d0] = g0.quadrants();
    let xi = SuperMatrix::product(&[&a0, &zeta.z, &d0.inverse()?]);
    let xit = SuperMatrix::product(&[&d0, &zeta.zt, &a0.inverse()?]);
    CosetPoint::from_parts(xi, xit)
}

/// `Z = (Y + ξ)(1 + Ỹξ)⁻¹`, `Z̃ = (Ỹ + ξ̃)(1 + Yξ̃)⁻¹`.
pub fn split_point<T: Real>(y: &CosetPoint<T>, xi: &CosetPoint<T>) -> Result<CosetPoint<T>> {
    let z = y.z.add(&xi.z).matmul(&y.zt.matmul(&xi.z).one_plus().inverse()?);
    let zt = y.zt.add(&xi.zt).matmul(&y.z.matmul(&xi.zt).one_plus().inverse()?);
    CosetPoint::from_parts(z, zt)
}

/// `g₀·ζ` against the zero-mode/massive-mode form.
pub fn verify_mode_split<T: Real>(g0: &SuperMatrix<T>, zeta: &CosetPoint<T>) -> Result<Vec<IdentityCheck>> {
    let direct = group_action(g0, zeta)?;
    let split = split_point(&zero_mode(g0)?, &gauge_invariant(g0, zeta)?)?;
    Ok(vec![
        IdentityCheck::new("mode-split", direct.z.max_abs_diff(&split.z), ALGEBRAIC_TOL),
        IdentityCheck::new("mode-split-tilde", direct.zt.max_abs_diff(&split.zt), ALGEBRAIC_TOL),
    ])
}

/// `ψ = ξ(1 − ξ̃ξ)^{−1/2}`, `ψ̃ = ξ̃(1 − ξξ̃)^{−1/2}`.
pub fn psi_from_xi<T: Real>(xi: &CosetPoint<T>) -> Result<CosetPoint<T>> {
    let psi = xi.z.matmul(&xi.zt.matmul(&xi.z).inv_sqrt_one_minus()?);
    let psit = xi.zt.matmul(&xi.z.matmul(&xi.zt).inv_sqrt_one_minus()?);
    CosetPoint::from_parts(psi, psit)
}

/// `ξ = ψ(1 + ψ̃ψ)^{−1/2}`, `ξ̃ = ψ̃(1 + ψψ̃)^{−1/2}`.
pub fn xi_from_psi<T: Real>(psi: &CosetPoint<T>) -> Result<CosetPoint<T>> {
    let xi = psi.z.matmul(&psi.zt.matmul(&psi.z).inv_sqrt_one_plus()?);
    let xit = psi.zt.matmul(&psi.z.matmul(&psi.zt).inv_sqrt_one_plus()?);
    CosetPoint::from_parts(xi, xit)
}

/// Coefficient of `ε²` in `f(ε)` by averaging over a circle.
fn quadratic_coefficient<T: Real>(
    gens: usize,
    f: impl Fn(Complex<T>) -> Result<Grassmann<T>>,
) -> Result<Grassmann<T>> {
    let r = T::lit(TAYLOR_RADIUS);
    let n = TAYLOR_SAMPLES;
    let mut acc = Grassmann::zero(gens);
    for k in 0..n {
        let phase = T::TAU() * T::count(k) / T::count(n);
        let eps = cis(phase) * r;
        acc.add_assign_ref(&f(eps)?.scale(cis(-phase * T::lit(2.0))));
    }
    Ok(acc.scale(Complex::from((T::count(n) * r * r).recip())))
}

/// The `ψ` variables: roundtrip through `ξ`, the diagonal blocks of
/// `QΛ − 1`, the bare action in the new variables, and its quadratic part
/// `STr(ψψ̃ − 𝓑ψ𝓑†ψ̃)`.
pub fn verify_psi_transform<T: Real>(
    xi_points: &[CosetPoint<T>],
    bcal: &Mat<Complex<T>>,
) -> Result<Vec<IdentityCheck>> {
    let first = xi_points
        .first()
        .ok_or_else(|| Error::InvalidArgument("no points".into()))?;
    let gens = first.gens();
    let mut roundtrip = T::zero();
    let mut plus = T::zero();
    let mut minus = T::zero();
    let mut psis = Vec::with_capacity(xi_points.len());
    let two = Complex::from(T::lit(2.0));
    for xi in xi_points {
        let psi = psi_from_xi(xi)?;
        roundtrip = roundtrip.max(xi_from_psi(&psi)?.deviation(xi));
        let ql = q_matrix(xi)?.matmul(&lambda(gens));
        let [pp, _, _, mm] = ql.quadrants();
        plus = plus.max(pp.one_minus().neg().max_abs_diff(&psi.z.matmul(&psi.zt).scale(two)));
        minus = minus.max(mm.one_minus().neg().max_abs_diff(&psi.zt.matmul(&psi.z).scale(two)));
        psis.push(psi);
    }
    let mut checks = vec![
        IdentityCheck::new("psi-roundtrip", roundtrip, ALGEBRAIC_TOL),
        IdentityCheck::new("q-lambda-plus", plus, ALGEBRAIC_TOL),
        IdentityCheck::new("q-lambda-minus", minus, ALGEBRAIC_TOL),
    ];
    if bcal.rows() != xi_points.len() || !bcal.is_square() {
        return Err(Error::InvalidArgument("propagation matrix does not match bond count".into()));
    }
    let b = lifted_bcal(gens, bcal);
    let (xi, xit) = stack(xi_points);
    let (psi, psit) = stack(&psis);
    let via_xi = bare_action(&xi, &xit, &b)?;
    let via_psi = bare_action_psi(&psi, &psit, &b)?;
    checks.push(IdentityCheck::new("bare-action-psi", via_psi.max_abs_diff(&via_xi), SERIES_TOL));

    let quad = quadratic_coefficient(gens, |eps| bare_action_psi(&psi.scale(eps), &psit.scale(eps), &b))?;
    let bdag = b.numeric_adjoint()?;
    let expected = psi
        .matmul(&psit)
        .sub(&SuperMatrix::product(&[&b, &psi, &bdag, &psit]))
        .str();
    checks.push(IdentityCheck::new("quadratic-coefficient", quad.max_abs_diff(&expected), SERIES_TOL));
    Ok(checks)
}

/// `Σ(Y, Ỹ)` and `Σ′(Y, Ỹ)`.
pub fn source_blocks<T: Real>(y: &CosetPoint<T>) -> Result<(SuperMatrix<T>, SuperMatrix<T>)> {
    let gens = y.gens();
    let s3 = sigma3(gens);
    let r = y.z.matmul(&y.zt).one_minus().inverse()?;
    let s = y.zt.matmul(&y.z).one_minus().inverse()?;
    let zero = SuperMatrix::zeros(gens, &superspace_grading());
    let left = SuperMatrix::from_quadrants(&r, &zero, &zero, &s);
    let half = Complex::from(T::lit(0.5));
    let sigma = SuperMatrix::from_quadrants(
        &s3,
        &s3.matmul(&y.z),
        &y.zt.matmul(&s3),
        &SuperMatrix::product(&[&y.zt, &s3, &y.z]),
    );
    let sigma_p = SuperMatrix::from_quadrants(
        &SuperMatrix::product(&[&y.z, &s3, &y.zt]),
        &y.z.matmul(&s3),
        &s3.matmul(&y.zt),
        &s3,
    );
    Ok((left.matmul(&sigma).scale(half), left.matmul(&sigma_p).scale(half)))
}

/// The three source terms written in terms of `Σ`, `Σ′` and `Q(ξ, ξ̃)Λ`.
pub fn verify_source_rewrite<T: Real>(y: &CosetPoint<T>, xi: &CosetPoint<T>) -> Result<Vec<IdentityCheck>> {
    let gens = y.gens();
    let s3 = sigma3(gens);
    let p = split_point(y, xi)?;
    let zzt = p.z.matmul(&p.zt);
    let ztz = p.zt.matmul(&p.z);
    let r = zzt.one_minus().inverse()?;
    let s = ztz.one_minus().inverse()?;
    let lhs1 = SuperMatrix::product(&[&s3, &r, &zzt]).str();
    let lhs2 = SuperMatrix::product(&[&s3, &s, &ztz]).str();
    let lhs3 = SuperMatrix::product(&[&s3, &p.z, &s, &s3, &p.zt, &r]).str();

    let (sigma, sigma_p) = source_blocks(y)?;
    let ql = q_matrix(xi)?.matmul(&lambda(gens));
    let minus_one = Grassmann::real(gens, -T::one());
    let rhs1 = &minus_one + &sigma.matmul(&ql).str();
    let rhs2 = &minus_one + &sigma_p.matmul(&ql).str();
    let rhs3 = SuperMatrix::product(&[&sigma, &ql, &sigma_p, &ql]).str();
    Ok(vec![
        IdentityCheck::new("source-rewrite-1", lhs1.max_abs_diff(&rhs1), SERIES_TOL),
        IdentityCheck::new("source-rewrite-2", lhs2.max_abs_diff(&rhs2), SERIES_TOL),
        IdentityCheck::new("source-rewrite-3", lhs3.max_abs_diff(&rhs3), SERIES_TOL),
    ])
}

/// Runs every identity at one random configuration drawn from `seed`.
pub fn verify_all_at<T: Real>(gens: usize, profile: Profile, seed: u64) -> Result<Vec<IdentityCheck>> {
    const BONDS: usize = 2;
    let mut rng = rng_from_seed(seed);
    let point = CosetPoint::<T>::random(gens, profile, &mut rng);
    let g0 = random_group_element::<T>(gens, &mut rng);
    let g1 = random_group_element::<T>(gens, &mut rng);
    let bonds: Vec<CosetPoint<T>> = (0..BONDS)
        .map(|_| CosetPoint::random(gens, profile, &mut rng))
        .collect();
    let u = random_bond_unitary::<T>(BONDS, &mut rng);
    let xi = CosetPoint::<T>::random(gens, profile, &mut rng);
    let y = zero_mode(&random_group_element::<T>(gens, &mut rng))?;

    let mut checks = verify_q_form(&point)?;
    checks.extend(verify_composition(&g0, &g1, &point)?);
    checks.extend(verify_invariance(&g0, &bonds, &u)?);
    checks.extend(verify_mode_split(&g0, &point)?);
    checks.extend(verify_psi_transform(&bonds, &u)?);
    checks.extend(verify_source_rewrite(&y, &xi)?);
    Ok(checks.into_iter().map(|c| c.with_seed(seed)).collect())
}

/// [`verify_all_at`] over `points` seeds derived from `master_seed`.
pub fn coset_suite<T: Real>(
    gens: usize,
    profile: Profile,
    points: usize,
    master_seed: u64,
) -> Result<Vec<IdentityCheck>> {
    use rayon::prelude::*;
    let per_point: Vec<Result<Vec<IdentityCheck>>> = (0..points)
        .into_par_iter()
        .map(|i| verify_all_at::<T>(gens, profile, derive_seed(master_seed, i as u64)))
        .collect();
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

/// Worst case per identity, in first-seen order.
pub fn summarize(checks: &[IdentityCheck]) -> Vec<IdentityCheck> {
    let mut out: Vec<IdentityCheck> = Vec::new();
    for c in checks {
        match out.iter_mut().find(|o| o.identity == c.identity) {
            Some(o) => {
                if !(c.max_deviation <= o.max_deviation) {
                    *o = c.clone();
                }
            }
            None => out.push(c.clone()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = CosetPoint<f64>;

    fn assert_all_pass(checks: &[IdentityCheck]) {
        for c in checks {
            assert!(c.passed, "{} deviates by {:e}", c.identity, c.max_deviation);
        }
    }

    #[test]
    fn origin_gives_identity_and_lambda() {
        let p = P::origin(4);
        let g = build_g(&p).unwrap();
        assert!(g.max_abs_diff(&SuperMatrix::identity(4, &coset_grading())) < 1e-15);
        assert!(q_matrix(&p).unwrap().max_abs_diff(&lambda(4)) < 1e-15);
    }

    #[test]
    fn identity_action_is_trivial() {
        let mut rng = rng_from_seed(1);
        let p = P::random(4, Profile::Generic, &mut rng);
        let id = SuperMatrix::identity(4, &coset_grading());
        assert_eq!(group_action(&id, &p).unwrap().deviation(&p), 0.0);
    }

    #[test]
    fn zero_mode_is_action_on_origin() {
        let mut rng = rng_from_seed(2);
        let g0 = random_group_element::<f64>(4, &mut rng);
        let [a, b, c, d] = g0.quadrants();
        let y = zero_mode(&g0).unwrap();
        assert!(y.z.max_abs_diff(&b.matmul(&d.inverse().unwrap())) < 1e-14);
        assert!(y.zt.max_abs_diff(&c.matmul(&a.inverse().unwrap())) < 1e-14);
    }

    #[test]
    fn q_form_and_composition_hold() {
        let mut rng = rng_from_seed(3);
        let p = P::random(4, Profile::Generic, &mut rng);
        assert_all_pass(&verify_q_form(&p).unwrap());
        let g0 = random_group_element(4, &mut rng);
        let g1 = random_group_element(4, &mut rng);
        assert_all_pass(&verify_composition(&g0, &g1, &p).unwrap());
    }

    #[test]
    fn invariance_with_identity_group_element() {
        let mut rng = rng_from_seed(4);
        let pts: Vec<P> = (0..2).map(|_| P::random(4, Profile::Generic, &mut rng)).collect();
        let u = random_bond_unitary(2, &mut rng);
        let id = SuperMatrix::identity(4, &coset_grading());
        let checks = verify_invariance(&id, &pts, &u).unwrap();
        assert_all_pass(&checks);
        assert!(checks[0].max_deviation < 1e-15);
    }

    #[test]
    fn invariance_generic() {
        let mut rng = rng_from_seed(5);
        let pts: Vec<P> = (0..2).map(|_| P::random(4, Profile::Generic, &mut rng)).collect();
        let u = random_bond_unitary(2, &mut rng);
        assert!(u.unitarity_defect() < 1e-14);
        let g0 = random_group_element(4, &mut rng);
        assert_all_pass(&verify_invariance(&g0, &pts, &u).unwrap());
    }

    #[test]
    fn mode_split_trivial_cases() {
        let mut rng = rng_from_seed(6);
        let g0 = random_group_element::<f64>(4, &mut rng);
        let y = zero_mode(&g0).unwrap();
        let at_origin = group_action(&g0, &P::origin(4)).unwrap();
        assert_eq!(at_origin, y);
        let zeta = P::random(4, Profile::Generic, &mut rng);
        let id = SuperMatrix::identity(4, &coset_grading());
        assert_eq!(gauge_invariant(&id, &zeta).unwrap().deviation(&zeta), 0.0);
        assert_all_pass(&verify_mode_split(&g0, &zeta).unwrap());
    }

    #[test]
    fn mode_split_generic_six_generators() {
        let mut rng = rng_from_seed(7);
        let g0 = random_group_element::<f64>(6, &mut rng);
        let zeta = P::random(6, Profile::Generic, &mut rng);
        assert_all_pass(&verify_mode_split(&g0, &zeta).unwrap());
    }

    #[test]
    fn psi_of_zero_is_zero() {
        let psi = psi_from_xi(&P::origin(4)).unwrap();
        assert!(psi.z.is_zero() && psi.zt.is_zero());
    }

    #[test]
    fn nilpotent_xi_roundtrip_is_exact() {
        let mut rng = rng_from_seed(8);
        let xi = P::random_nilpotent(4, &mut rng);
        let back = xi_from_psi(&psi_from_xi(&xi).unwrap()).unwrap();
        assert!(back.deviation(&xi) < 1e-15);
    }

    #[test]
    fn psi_transform_generic() {
        let mut rng = rng_from_seed(9);
        let pts: Vec<P> = (0..2).map(|_| P::random(4, Profile::Generic, &mut rng)).collect();
        let u = random_bond_unitary(2, &mut rng);
        assert_all_pass(&verify_psi_transform(&pts, &u).unwrap());
    }

    #[test]
    fn source_rewrite_special_points() {
        let mut rng = rng_from_seed(10);
        let y = zero_mode(&random_group_element::<f64>(4, &mut rng)).unwrap();
        let xi = P::random(4, Profile::Generic, &mut rng);
        assert_all_pass(&verify_source_rewrite(&y, &P::origin(4)).unwrap());
        assert_all_pass(&verify_source_rewrite(&P::origin(4), &xi).unwrap());
    }

    #[test]
    fn source_rewrite_generic_six_generators() {
        let mut rng = rng_from_seed(11);
        let y = zero_mode(&random_group_element::<f64>(6, &mut rng)).unwrap();
        let xi = P::random(6, Profile::Generic, &mut rng);
        assert_all_pass(&verify_source_rewrite(&y, &xi).unwrap());
    }

    #[test]
    fn physical_profile_obeys_reality_relations() {
        let mut rng = rng_from_seed(12);
        let p = P::random(4, Profile::Physical, &mut rng);
        let zbb = p.z.get(0, 0).body();
        let zff = p.z.get(1, 1).body();
        assert!((p.zt.get(0, 0).body() - zbb.conj()).norm() < 1e-15);
        assert!((p.zt.get(1, 1).body() + zff.conj()).norm() < 1e-15);
        assert_all_pass(&verify_all_at::<f64>(4, Profile::Physical, 99).unwrap());
    }

    #[test]
    fn domain_violation_rejected() {
        let mut z = SuperMatrix::<f64>::zeros(2, &superspace_grading());
        z.set(0, 0, Grassmann::real(2, 1.5));
        let zt = SuperMatrix::zeros(2, &superspace_grading());
        assert!(matches!(CosetPoint::new(z, zt), Err(Error::InvalidCosetPoint(_))));
    }

    #[test]
    fn summary_keeps_worst_case() {
        let checks = verify_all_at::<f64>(2, Profile::Generic, 1).unwrap();
        let more = verify_all_at::<f64>(2, Profile::Generic, 2).unwrap();
        let all: Vec<_> = checks.iter().chain(&more).cloned().collect();
        let s = summarize(&all);
        assert_eq!(s.len(), checks.len());
        for c in &s {
            let worst = all
                .iter()
                .filter(|x| x.identity == c.identity)
                .map(|x| x.max_deviation)
                .fold(0.0, f64::max);
            assert_eq!(c.max_deviation, worst);
        }
    }
}
