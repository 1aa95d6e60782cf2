//! Quantum graph numerics: bond scattering and propagation matrices, the
//! Perron–Frobenius operator and its resolvent, massive-mode estimates,
//! Wick contraction enumeration, a Grassmann/supermatrix engine for coset
//! identities, and spectral form factors.
//!
//! All numerical types are generic over [`scalar::Real`]; the aliases
//! below fix the precision to `f64`.

pub mod coset;
pub mod error;
pub mod graph;
pub mod grassmann;
pub mod linalg;
pub mod massive;
pub mod perron;
pub mod rng;
pub mod scalar;
pub mod scattering;
pub mod spectral;
pub mod wick;

pub use error::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;
pub type Mat64 = linalg::Mat<f64>;
pub type CMat64 = linalg::Mat<Complex64>;
pub type BondLengths64 = graph::BondLengths<f64>;
pub type BondScatteringMatrix64 = scattering::BondScatteringMatrix<f64>;
pub type PropagationMatrix64 = scattering::PropagationMatrix<f64>;
pub type MagneticPhases64 = scattering::MagneticPhases<f64>;
pub type QuantumMap64 = scattering::QuantumMap<f64>;
pub type PfOperator64 = perron::PfOperator<f64>;
pub type GapReport64 = perron::GapReport<f64>;
pub type PfResolvent64 = perron::PfResolvent<f64>;
pub type WMatrix64 = perron::WMatrix<f64>;
pub type EstimateReport64 = massive::EstimateReport<f64>;
pub type ScalingSeries64 = massive::ScalingSeries<f64>;
pub type Grassmann64 = grassmann::Grassmann<f64>;
pub type SuperMatrix64 = grassmann::SuperMatrix<f64>;
pub type CosetPoint64 = coset::CosetPoint<f64>;
pub type FormFactorCurve64 = spectral::FormFactorCurve<f64>;
