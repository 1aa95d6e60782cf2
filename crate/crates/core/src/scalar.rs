//! Scalar abstractions shared by the numerical modules.
//!
//! Everything numeric in this crate is generic over [`Real`] (`f32` or `f64`)
//! and over [`Scalar`], which additionally covers `Complex<T>`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Real floating point type used for all numerics.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
    + Scalar<Real = Self>
{
    /// Tolerance for structural checks (unitarity, bistochasticity).
    ///
    /// `1e-12` for `f64`; scaled to the precision of narrower types.
    fn structural_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn structural_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn structural_tol() -> Self {
        5e-5
    }
}

/// Field element usable as a dense-matrix entry: a [`Real`] or a complex number over one.
pub trait Scalar:
    Copy + Num + NumAssign + Neg<Output = Self> + Sum + Debug + Default + Send + Sync + 'static
{
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> Self::Real;
    fn norm_sqr(self) -> Self::Real;
    fn real_part(self) -> Self::Real;
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn norm_sqr(self) -> $t {
                self * self
            }
            #[inline]
            fn real_part(self) -> $t {
                self
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);

impl<T: Real> Scalar for Complex<T> {
    type Real = T;
    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn norm_sqr(self) -> T {
        Complex::norm_sqr(&self)
    }
    #[inline]
    fn real_part(self) -> T {
        self.re
    }
}

/// `exp(i * phase)`.
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}
