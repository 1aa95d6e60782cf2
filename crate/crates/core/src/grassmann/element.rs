use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Real;

/// Largest supported number of generators (4096 coefficients).
pub const MAX_GENERATORS: usize = 12;

/// Grading of an element by the parity of its monomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Element of the exterior algebra on `G` generators with complex
/// coefficients.
///
/// Coefficient `k` multiplies the ordered monomial `θ_{i1} θ_{i2} ⋯` with
/// `i1 < i2 < ⋯` running over the set bits of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grassmann<T> {
    gens: usize,
    coeffs: Vec<Complex<T>>,
}

/// Sign of `θ_a θ_b` reordered into canonical form, for disjoint masks.
#[inline]
fn reorder_sign(a: usize, b: usize) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let q = rest.trailing_zeros();
        swaps += (a >> (q + 1)).count_ones();
        rest &= rest - 1;
    }
    swaps % 2 == 1
}

impl<T: Real> Grassmann<T> {
    fn check_gens(gens: usize) {
        assert!(gens <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators supported");
    }

    pub fn zero(gens: usize) -> Self {
        Self::check_gens(gens);
        Grassmann {
            gens,
            coeffs: vec![Complex::zero(); 1 << gens],
        }
    }

    pub fn scalar(gens: usize, value: Complex<T>) -> Self {
        let mut e = Self::zero(gens);
        e.coeffs[0] = value;
        e
    }

    pub fn real(gens: usize, value: T) -> Self {
        Self::scalar(gens, Complex::from(value))
    }

    pub fn one(gens: usize) -> Self {
        Self::real(gens, T::one())
    }

    /// The generator `θ_i`.
    pub fn generator(gens: usize, i: usize) -> Result<Self> {
        if i >= gens {
            return Err(Error::InvalidArgument(format!(
                "generator {i} out of range for {gens} generators"
            )));
        }
        let mut e = Self::zero(gens);
        e.coeffs[1 << i] = Complex::one();
        Ok(e)
    }

    pub fn from_coeffs(gens: usize, coeffs: Vec<Complex<T>>) -> Result<Self> {
        Self::check_gens(gens);
        if coeffs.len() != 1 << gens {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients given, expected {}",
                coeffs.len(),
                1usize << gens
            )));
        }
        Ok(Grassmann { gens, coeffs })
    }

    /// Random element of the given parity: every monomial of that parity gets
    /// an independent complex Gaussian coefficient scaled by `soul_scale`,
    /// and an even element gets a body drawn uniformly from the disc of
    /// radius `body_radius`.
    pub fn random(gens: usize, parity: Parity, body_radius: T, soul_scale: T, rng: &mut Rng) -> Self {
        let mut e = Self::zero(gens);
        for mask in 1..e.coeffs.len() {
            let odd = mask.count_ones() % 2 == 1;
            let keep = match parity {
                Parity::Even => !odd,
                Parity::Odd => odd,
                Parity::Mixed => true,
            };
            if keep {
                e.coeffs[mask] = Complex::new(gaussian(rng), gaussian(rng)) * soul_scale;
            }
        }
        if parity != Parity::Odd {
            let r = body_radius * T::lit(rng.gen::<f64>()).sqrt();
            let phi = T::lit(rng.gen::<f64>()) * T::TAU();
            e.coeffs[0] = Complex::from_polar(r, phi);
        }
        e
    }

    #[inline]
    pub fn gens(&self) -> usize {
        self.gens
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, mask: usize) -> Complex<T> {
        self.coeffs[mask]
    }

    /// Numeric part (coefficient of the unit monomial).
    #[inline]
    pub fn body(&self) -> Complex<T> {
        self.coeffs[0]
    }

    /// Nilpotent part.
    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = Complex::zero();
        s
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for (mask, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if mask.count_ones() % 2 == 1 {
                odd = true;
            } else {
                even = true;
            }
        }
        match (even, odd) {
            (true, true) => Parity::Mixed,
            (false, true) => Parity::Odd,
            _ => Parity::Even,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Largest coefficient deviation.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.gens, other.gens, "generator count mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Grassmann {
            gens: self.gens,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Same element in an algebra with more generators.
    pub fn embed(&self, gens: usize) -> Self {
        assert!(gens >= self.gens);
        let mut e = Self::zero(gens);
        e.coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        e
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.gens, other.gens, "generator count mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    /// `self += a * b`.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        assert_eq!(a.gens, b.gens, "generator count mismatch");
        assert_eq!(self.gens, a.gens, "generator count mismatch");
        let full = self.coeffs.len() - 1;
        for (i, &ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let free = full & !i;
            let mut j = free;
            loop {
                let cb = b.coeffs[j];
                if !cb.is_zero() {
                    let p = ca * cb;
                    if reorder_sign(i, j) {
                        self.coeffs[i | j] -= p;
                    } else {
                        self.coeffs[i | j] += p;
                    }
                }
                if j == 0 {
                    break;
                }
                j = (j - 1) & free;
            }
        }
    }

    /// `Σ_k c_k n^k` with `n` the soul; `c` gives the Taylor coefficients of
    /// the function at the body. Terminates once `n^k` vanishes.
    fn taylor(&self, c: impl Fn(usize) -> Complex<T>) -> Self {
        let n = self.soul();
        let mut out = Self::scalar(self.gens, c(0));
        let mut power = Self::one(self.gens);
        for k in 1..=self.gens {
            power = &power * &n;
            if power.is_zero() {
                break;
            }
            out.add_assign_ref(&power.scale(c(k)));
        }
        out
    }

    fn require_invertible_body(&self, what: &str) -> Result<Complex<T>> {
        let b = self.body();
        let tiny = T::epsilon() * self.max_abs().max(T::one());
        if b.norm() <= tiny {
            return Err(Error::NotInvertible(format!("{what} of element with vanishing body")));
        }
        Ok(b)
    }

    pub fn inv(&self) -> Result<Self> {
        let b = self.require_invertible_body("inverse")?;
        let r = b.inv();
        Ok(self.taylor(|k| {
            let p = r.powi(k as i32 + 1);
            if k % 2 == 0 {
                p
            } else {
                -p
            }
        }))
    }

    /// Principal power `x^α`.
    pub fn powf(&self, alpha: T) -> Result<Self> {
        let b = self.require_invertible_body("power")?;
        let lead = b.powf(alpha);
        let r = b.inv();
        Ok(self.taylor(|k| lead * binomial(alpha, k) * r.powi(k as i32)))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Result<Self> {
        self.powf(T::lit(0.5))
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Result<Self> {
        let b = self.require_invertible_body("logarithm")?;
        let r = b.inv();
        Ok(self.taylor(|k| {
            if k == 0 {
                b.ln()
            } else {
                let t = r.powi(k as i32) / T::count(k);
                if k % 2 == 1 {
                    t
                } else {
                    -t
                }
            }
        }))
    }

    pub fn exp(&self) -> Self {
        let lead = self.body().exp();
        self.taylor(|k| lead / (1..=k).fold(T::one(), |f, i| f * T::count(i)))
    }
}

/// Generalized binomial coefficient `C(α, k)`.
fn binomial<T: Real>(alpha: T, k: usize) -> T {
    let mut c = T::one();
    for i in 0..k {
        c = c * (alpha - T::count(i)) / T::count(i + 1);
    }
    c
}

fn gaussian<T: Real>(rng: &mut Rng) -> T {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen();
    T::lit((-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos())
}

impl<'a, T: Real> Mul<&'a Grassmann<T>> for &'a Grassmann<T> {
    type Output = Grassmann<T>;
    fn mul(self, rhs: &'a Grassmann<T>) -> Grassmann<T> {
        let mut out = Grassmann::zero(self.gens);
        out.add_product(self, rhs);
        out
    }
}

impl<'a, T: Real> Add<&'a Grassmann<T>> for &'a Grassmann<T> {
    type Output = Grassmann<T>;
    fn add(self, rhs: &'a Grassmann<T>) -> Grassmann<T> {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl<'a, T: Real> Sub<&'a Grassmann<T>> for &'a Grassmann<T> {
    type Output = Grassmann<T>;
    fn sub(self, rhs: &'a Grassmann<T>) -> Grassmann<T> {
        assert_eq!(self.gens, rhs.gens, "generator count mismatch");
        Grassmann {
            gens: self.gens,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &Grassmann<T> {
    type Output = Grassmann<T>;
    fn neg(self) -> Grassmann<T> {
        Grassmann {
            gens: self.gens,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    type G = Grassmann<f64>;

    fn th(i: usize) -> G {
        G::generator(4, i).unwrap()
    }

    #[test]
    fn generators_anticommute() {
        let a = &th(0) * &th(1);
        let b = &th(1) * &th(0);
        assert_eq!(a, -&b);
        assert!((&th(2) * &th(2)).is_zero());
        assert_eq!(a.coeff(0b11), Complex::new(1.0, 0.0));
    }

    #[test]
    fn nilpotent_geometric_series() {
        let t = &th(0) * &th(1);
        let x = &G::one(4) + &t;
        assert_eq!(x.inv().unwrap(), &G::one(4) - &t);
    }

    #[test]
    fn sqrt_roundtrip() {
        let t = &th(0) * &th(1);
        let x = &G::one(4) + &t;
        let s = x.sqrt().unwrap();
        assert!((&s * &s).max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn series_on_random_even_elements() {
        let mut rng = rng_from_seed(5);
        let gens = 6;
        let mut x = G::random(gens, Parity::Even, 0.5, 0.3, &mut rng);
        x.add_assign_ref(&G::one(gens));
        let one = G::one(gens);
        assert!((&x * &x.inv().unwrap()).max_abs_diff(&one) < 1e-12);
        assert!(x.ln().unwrap().exp().max_abs_diff(&x) < 1e-12);
        let c = x.powf(1.0 / 3.0).unwrap();
        assert!((&(&c * &c) * &c).max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn random_parity_is_respected() {
        let mut rng = rng_from_seed(2);
        assert_eq!(G::random(4, Parity::Odd, 1.0, 1.0, &mut rng).parity(), Parity::Odd);
        assert_eq!(G::random(4, Parity::Even, 1.0, 1.0, &mut rng).parity(), Parity::Even);
        let odd = G::random(4, Parity::Odd, 1.0, 1.0, &mut rng);
        let odd2 = G::random(4, Parity::Odd, 1.0, 1.0, &mut rng);
        assert_eq!((&odd * &odd2).parity(), Parity::Even);
        // odd elements square to zero only when they are single monomials;
        // the product still anticommutes
        assert!((&(&odd * &odd2) + &(&odd2 * &odd)).max_abs() < 1e-14);
    }

    #[test]
    fn singular_body_rejected() {
        assert!(matches!(th(0).inv(), Err(Error::NotInvertible(_))));
        assert!(th(1).ln().is_err());
    }
}
