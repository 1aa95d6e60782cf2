//! Vertex and bond scattering matrices, the propagation matrix and the
//! phase-dressed quantum map.

use num_complex::Complex;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{BondLengths, DirectedBondSpace, Graph};
use crate::linalg::{Csr, Mat};
use crate::rng::rng_from_seed;
use crate::scalar::{cis, Real};

/// Family of vertex scattering matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    /// `exp(2πi jk/v)/√v`.
    Dft,
    /// `2/v − δ_jk`.
    Neumann,
}

/// `v × v` unitary vertex scattering matrix of the given family.
pub fn vertex_matrix<T: Real>(kind: VertexKind, v: usize) -> Result<Mat<Complex<T>>> {
    if v == 0 {
        return Err(Error::InvalidArgument("vertex matrix of dimension 0".into()));
    }
    let vt = T::count(v);
    Ok(match kind {
        VertexKind::Dft => {
            let norm = vt.sqrt().recip();
            Mat::from_fn(v, v, |j, k| {
                let phase = T::TAU() * T::count((j * k) % v) / vt;
                cis(phase) * norm
            })
        }
        VertexKind::Neumann => Mat::from_fn(v, v, |j, k| {
            let d = if j == k { T::one() } else { T::zero() };
            Complex::new(T::lit(2.0) / vt - d, T::zero())
        }),
    })
}

fn check_unitary<T: Real>(m: &Mat<Complex<T>>, what: &str) -> Result<()> {
    let defect = m.unitarity_defect();
    if defect > T::structural_tol() {
        return Err(Error::InternalConsistency(format!("{what} not unitary: defect {:e}", defect.as_f64())));
    }
    Ok(())
}

/// Bond scattering matrix `Σ` on the directed-bond space.
///
/// `Σ_{μν}` couples the two directed bonds that terminate at a common vertex
/// `α`, with value `σ^(α)` indexed by the local positions of their edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BondScatteringMatrix<T> {
    matrix: Mat<Complex<T>>,
}

impl<T: Real> BondScatteringMatrix<T> {
    /// Places one vertex matrix per vertex. Local edge order is by edge id.
    pub fn assemble(graph: &Graph, vertex_matrices: &[Mat<Complex<T>>]) -> Result<Self> {
        if vertex_matrices.len() != graph.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "{} vertex matrices for {} vertices",
                vertex_matrices.len(),
                graph.vertex_count()
            )));
        }
        for (a, s) in vertex_matrices.iter().enumerate() {
            if s.rows() != graph.degree(a) || s.cols() != graph.degree(a) {
                return Err(Error::InvalidArgument(format!(
                    "vertex {a}: matrix {}x{} for degree {}",
                    s.rows(),
                    s.cols(),
                    graph.degree(a)
                )));
            }
            check_unitary(s, &format!("vertex matrix {a}"))?;
        }
        let space = graph.directed_bonds();
        let n = space.len();
        let mut matrix = Mat::zeros(n, n);
        for (alpha, sigma) in vertex_matrices.iter().enumerate() {
            let incident = graph.incident(alpha);
            // directed bond of edge `b` that terminates at alpha
            let inbound = |b: usize| {
                let mu = 2 * b;
                if space.terminus(mu) == alpha {
                    mu
                } else {
                    mu + 1
                }
            };
            for (i, &bi) in incident.iter().enumerate() {
                for (j, &bj) in incident.iter().enumerate() {
                    matrix[(inbound(bi), inbound(bj))] = sigma[(i, j)];
                }
            }
        }
        check_unitary(&matrix, "bond scattering matrix")?;
        Ok(Self { matrix })
    }

    /// Same vertex family at every vertex.
    pub fn uniform(graph: &Graph, kind: VertexKind) -> Result<Self> {
        let sigmas = (0..graph.vertex_count())
            .map(|a| vertex_matrix(kind, graph.degree(a)))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(graph, &sigmas)
    }

    pub fn matrix(&self) -> &Mat<Complex<T>> {
        &self.matrix
    }
}

/// Unitary propagation matrix `𝓑 = σ₁ᴰ Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrix<T> {
    matrix: Mat<Complex<T>>,
}

impl<T: Real> PropagationMatrix<T> {
    /// Row `μ` of `𝓑` is row `flip(μ)` of `Σ`.
    pub fn from_bond_scattering(sigma: &BondScatteringMatrix<T>) -> Self {
        let n = sigma.matrix.rows();
        let perm: Vec<usize> = (0..n).map(DirectedBondSpace::flip).collect();
        Self { matrix: sigma.matrix.permute_rows(&perm) }
    }

    /// Wraps an arbitrary unitary of even dimension.
    pub fn from_unitary(matrix: Mat<Complex<T>>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() % 2 != 0 || matrix.rows() == 0 {
            return Err(Error::InvalidArgument("propagation matrix must be square of even dimension".into()));
        }
        check_unitary(&matrix, "propagation matrix")?;
        Ok(Self { matrix })
    }

    /// `K_V` with one vertex family throughout.
    pub fn complete(vertex_count: usize, kind: VertexKind) -> Result<Self> {
        let g = Graph::complete(vertex_count)?;
        Ok(Self::from_bond_scattering(&BondScatteringMatrix::uniform(&g, kind)?))
    }

    pub fn matrix(&self) -> &Mat<Complex<T>> {
        &self.matrix
    }

    /// `2B`.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn bond_count(&self) -> usize {
        self.dim() / 2
    }

    pub fn unitarity_defect(&self) -> T {
        self.matrix.unitarity_defect()
    }

    /// Simultaneous relabeling of the directed bonds.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { matrix: self.matrix.permute_symmetric(perm) }
    }
}

/// Independent phases `φ_μ ∈ [0, 2π)` per directed bond.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticPhases<T> {
    phases: Vec<T>,
}

impl<T: Real> MagneticPhases<T> {
    pub fn new(phases: Vec<T>) -> Self {
        Self { phases }
    }

    pub fn zeros(n: usize) -> Self {
        Self { phases: vec![T::zero(); n] }
    }

    pub fn sample(n: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let tau = T::TAU().as_f64();
        Self { phases: (0..n).map(|_| T::lit(rng.gen_range(0.0..tau))).collect() }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.phases
    }
}

/// `U(k) = diag(exp(i(k L_b + φ_μ))) 𝓑`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMap<T> {
    k: T,
    matrix: Mat<Complex<T>>,
}

impl<T: Real> QuantumMap<T> {
    pub fn new(bcal: &PropagationMatrix<T>, lengths: &BondLengths<T>, phases: &MagneticPhases<T>, k: T) -> Result<Self> {
        let n = bcal.dim();
        if lengths.len() * 2 != n || phases.as_slice().len() != n {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: 2B={n}, {} lengths, {} phases",
                lengths.len(),
                phases.as_slice().len()
            )));
        }
        let dressing = dressing(lengths, phases, k);
        let mut matrix = bcal.matrix.clone();
        for (mu, d) in dressing.into_iter().enumerate() {
            for x in matrix.row_mut(mu) {
                *x = *x * d;
            }
        }
        Ok(Self { k, matrix })
    }

    pub fn wavenumber(&self) -> T {
        self.k
    }

    pub fn matrix(&self) -> &Mat<Complex<T>> {
        &self.matrix
    }

    /// Sparse form for repeated products.
    pub fn to_csr(&self) -> Csr<Complex<T>> {
        Csr::from_dense(&self.matrix)
    }
}

/// Diagonal factors `exp(i(k L_b + φ_μ))`.
pub fn dressing<T: Real>(lengths: &BondLengths<T>, phases: &MagneticPhases<T>, k: T) -> Vec<Complex<T>> {
    phases
        .as_slice()
        .iter()
        .enumerate()
        .map(|(mu, &phi)| cis(k * lengths.as_slice()[mu / 2] + phi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn vertex_matrix_examples() {
        let n2 = vertex_matrix::<f64>(VertexKind::Neumann, 2).unwrap();
        assert_eq!(n2, Mat::from_rows(&[vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]).unwrap());
        let n1 = vertex_matrix::<f64>(VertexKind::Neumann, 1).unwrap();
        assert_eq!(n1[(0, 0)], c(1.0));
        let d2 = vertex_matrix::<f64>(VertexKind::Dft, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = Mat::from_rows(&[vec![c(h), c(h)], vec![c(h), c(-h)]]).unwrap();
        assert!(d2.max_abs_diff(&expect) < 1e-15);
        for v in 1..9 {
            for kind in [VertexKind::Dft, VertexKind::Neumann] {
                assert!(vertex_matrix::<f64>(kind, v).unwrap().unitarity_defect() < 1e-13);
            }
        }
        assert!(vertex_matrix::<f64>(VertexKind::Dft, 0).is_err());
    }

    #[test]
    fn single_bond() {
        let g = Graph::complete(2).unwrap();
        let sigma = BondScatteringMatrix::<f64>::uniform(&g, VertexKind::Neumann).unwrap();
        let b = PropagationMatrix::from_bond_scattering(&sigma);
        let swap = Mat::from_rows(&[vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]).unwrap();
        assert_eq!(b.matrix(), &swap);
        // applying the flip twice returns Σ
        let back = PropagationMatrix::from_bond_scattering(&BondScatteringMatrix { matrix: b.matrix().clone() });
        assert_eq!(back.matrix(), sigma.matrix());
    }

    #[test]
    fn k3_dft_support() {
        let g = Graph::complete(3).unwrap();
        let sigma = BondScatteringMatrix::<f64>::uniform(&g, VertexKind::Dft).unwrap();
        assert!(sigma.matrix().unitarity_defect() < 1e-12);
        for i in 0..6 {
            assert_eq!(sigma.matrix().row(i).iter().filter(|z| z.norm() > 0.0).count(), 2);
        }
        let b = PropagationMatrix::from_bond_scattering(&sigma);
        let d = g.directed_bonds();
        for mu in 0..6 {
            for nu in 0..6 {
                let nz = b.matrix()[(mu, nu)].norm() > 0.0;
                assert_eq!(nz, d.terminus(nu) == d.origin(mu), "{mu} {nu}");
            }
        }
    }

    #[test]
    fn neumann_is_bistochastic() {
        let g = Graph::random_regular(10, 3, 4).unwrap();
        let b = PropagationMatrix::from_bond_scattering(&BondScatteringMatrix::<f64>::uniform(&g, VertexKind::Neumann).unwrap());
        let f = b.matrix().norm_sqr_entries();
        for s in f.row_sums().into_iter().chain(f.col_sums()) {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quantum_map_dressing() {
        let g = Graph::complete(5).unwrap();
        let b = PropagationMatrix::from_bond_scattering(&BondScatteringMatrix::<f64>::uniform(&g, VertexKind::Dft).unwrap());
        let n = b.dim();
        let l = BondLengths::sample(g.bond_count(), 1.0, 2.0, 3).unwrap();
        let u0 = QuantumMap::new(&b, &l, &MagneticPhases::zeros(n), 0.0).unwrap();
        assert_eq!(u0.matrix(), b.matrix());
        let phases = MagneticPhases::sample(n, 11);
        let u = QuantumMap::new(&b, &l, &phases, 1.7).unwrap();
        assert!(u.matrix().unitarity_defect() < 1e-12);
        assert!((u.matrix().determinant().norm() - 1.0).abs() < 1e-10);
        let shifted = MagneticPhases::new(phases.as_slice().iter().map(|p| p + std::f64::consts::TAU).collect());
        let u2 = QuantumMap::new(&b, &l, &shifted, 1.7).unwrap();
        assert!(u.matrix().max_abs_diff(u2.matrix()) < 1e-12);
    }
}
