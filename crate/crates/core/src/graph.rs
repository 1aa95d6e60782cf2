//! Simple connected graphs, the directed-bond space and bond lengths.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

/// Attempt budget of the pairing-model construction.
pub const PAIRING_ATTEMPTS: usize = 1000;

/// Direction of a directed bond relative to its edge `(u, v)` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// From `u` to `v`.
    Plus,
    /// From `v` to `u`.
    Minus,
}

/// Connected simple graph on vertices `0..V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, normalising each edge to `(min, max)`.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 vertices, got {vertex_count}")));
        }
        let mut seen = HashSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (b, &(u, v)) in edges.iter().enumerate() {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidArgument(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::InvalidArgument(format!("repeated edge {e:?}")));
            }
            norm.push(e);
            adjacency[e.0].push(b);
            adjacency[e.1].push(b);
        }
        let g = Self { vertex_count, edges: norm, adjacency };
        if g.adjacency.iter().any(Vec::is_empty) || !g.is_connected() {
            return Err(Error::InvalidArgument("graph is not connected".into()));
        }
        Ok(g)
    }

    /// Complete graph `K_V`.
    pub fn complete(vertex_count: usize) -> Result<Self> {
        if vertex_count < 2 {
            return Err(Error::InvalidArgument(format!("complete graph needs V >= 2, got {vertex_count}")));
        }
        let mut edges = Vec::with_capacity(vertex_count * (vertex_count - 1) / 2);
        for u in 0..vertex_count {
            for v in u + 1..vertex_count {
                edges.push((u, v));
            }
        }
        Self::from_edges(vertex_count, &edges)
    }

    /// Uniform-ish random `degree`-regular graph by the pairing model with rejection.
    pub fn random_regular(vertex_count: usize, degree: usize, seed: u64) -> Result<Self> {
        if (vertex_count * degree) % 2 == 1 {
            return Err(Error::InvalidArgument(format!("V*degree = {} is odd", vertex_count * degree)));
        }
        if degree == 0 || degree >= vertex_count {
            return Err(Error::InvalidArgument(format!("degree {degree} must lie in 1..{vertex_count}")));
        }
        if degree == vertex_count - 1 {
            return Self::complete(vertex_count);
        }
        let mut rng = rng_from_seed(seed);
        let mut stubs: Vec<usize> = (0..vertex_count).flat_map(|v| std::iter::repeat(v).take(degree)).collect();
        'attempt: for _ in 0..PAIRING_ATTEMPTS {
            stubs.shuffle(&mut rng);
            let mut seen = HashSet::new();
            let mut edges = Vec::with_capacity(stubs.len() / 2);
            for pair in stubs.chunks_exact(2) {
                let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if u == v || !seen.insert((u, v)) {
                    continue 'attempt;
                }
                edges.push((u, v));
            }
            edges.sort_unstable();
            if let Ok(g) = Self::from_edges(vertex_count, &edges) {
                return Ok(g);
            }
        }
        Err(Error::ConstructionFailure {
            attempts: PAIRING_ATTEMPTS,
            reason: format!("no simple connected {degree}-regular graph on {vertex_count} vertices"),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn bond_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Incident edge ids of vertex `v`, sorted by edge id.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &b in &self.adjacency[v] {
                let (x, y) = self.edges[b];
                let w = if x == v { y } else { x };
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn directed_bonds(&self) -> DirectedBondSpace {
        DirectedBondSpace::new(self)
    }
}

/// The `2B` directed bonds, indexed by `mu = 2b + d` with `d = 0` for [`Direction::Plus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedBondSpace {
    origin: Vec<usize>,
    terminus: Vec<usize>,
}

impl DirectedBondSpace {
    pub fn new(graph: &Graph) -> Self {
        let mut origin = Vec::with_capacity(2 * graph.bond_count());
        let mut terminus = Vec::with_capacity(2 * graph.bond_count());
        for &(u, v) in graph.edges() {
            origin.extend([u, v]);
            terminus.extend([v, u]);
        }
        Self { origin, terminus }
    }

    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn index(bond: usize, dir: Direction) -> usize {
        2 * bond + usize::from(dir == Direction::Minus)
    }

    pub fn split(mu: usize) -> (usize, Direction) {
        (mu / 2, if mu % 2 == 0 { Direction::Plus } else { Direction::Minus })
    }

    pub fn flip(mu: usize) -> usize {
        mu ^ 1
    }

    pub fn origin(&self, mu: usize) -> usize {
        self.origin[mu]
    }

    pub fn terminus(&self, mu: usize) -> usize {
        self.terminus[mu]
    }
}

/// Positive bond lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct BondLengths<T> {
    lengths: Vec<T>,
}

impl<T: Real> BondLengths<T> {
    pub fn new(lengths: Vec<T>) -> Result<Self> {
        if lengths.iter().any(|&l| !(l > T::zero()) || !l.is_finite()) {
            return Err(Error::InvalidArgument("bond lengths must be positive and finite".into()));
        }
        Ok(Self { lengths })
    }

    /// `bonds` independent uniform draws from `[low, high]`.
    pub fn sample(bonds: usize, low: T, high: T, seed: u64) -> Result<Self> {
        if !(low > T::zero()) || !(high > low) {
            return Err(Error::InvalidArgument(format!("length interval [{low}, {high}] must satisfy 0 < low < high")));
        }
        let mut rng = rng_from_seed(seed);
        let (lo, hi) = (low.as_f64(), high.as_f64());
        let lengths = (0..bonds).map(|_| T::lit(rng.gen_range(lo..=hi)).max(low).min(high)).collect();
        Ok(Self { lengths })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Mean level spacing `π / Σ L_b`.
    pub fn mean_spacing(&self) -> T {
        T::PI() / self.lengths.iter().copied().sum::<T>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_counts() {
        let g = Graph::complete(2).unwrap();
        assert_eq!(g.bond_count(), 1);
        assert_eq!((g.degree(0), g.degree(1)), (1, 1));
        let g = Graph::complete(4).unwrap();
        assert_eq!(g.bond_count(), 6);
        assert_eq!(g.directed_bonds().len(), 12);
        let g = Graph::complete(5).unwrap();
        assert_eq!(g.bond_count(), 10);
        assert!((0..5).all(|v| g.degree(v) == 4));
        assert!(matches!(Graph::complete(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn random_regular_cases() {
        let g = Graph::random_regular(8, 3, 1).unwrap();
        assert_eq!(g.bond_count(), 12);
        assert!((0..8).all(|v| g.degree(v) == 3));
        assert!(g.is_connected());
        assert_eq!(g, Graph::random_regular(8, 3, 1).unwrap());
        assert_eq!(Graph::random_regular(6, 5, 9).unwrap(), Graph::complete(6).unwrap());
        assert!(matches!(Graph::random_regular(5, 3, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rejects_bad_edge_lists() {
        assert!(Graph::from_edges(3, &[(0, 0), (1, 2)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(Graph::from_edges(4, &[(0, 1), (2, 3)]).is_err());
    }

    #[test]
    fn directed_bond_layout() {
        let g = Graph::complete(4).unwrap();
        let d = g.directed_bonds();
        for mu in 0..d.len() {
            let nu = DirectedBondSpace::flip(mu);
            assert_ne!(mu, nu);
            assert_eq!(DirectedBondSpace::flip(nu), mu);
            assert_eq!(d.terminus(mu), d.origin(nu));
            let (b, dir) = DirectedBondSpace::split(mu);
            assert_eq!(DirectedBondSpace::index(b, dir), mu);
        }
    }

    #[test]
    fn lengths_sampling() {
        let l = BondLengths::<f64>::sample(3, 1.0, 2.0, 7).unwrap();
        assert!(l.as_slice().iter().all(|&x| (1.0..=2.0).contains(&x)));
        assert_eq!(l, BondLengths::sample(3, 1.0, 2.0, 7).unwrap());
        let l = BondLengths::<f64>::sample(1, 1.0, 1.0 + 1e-9, 1).unwrap();
        assert!((l.as_slice()[0] - 1.0).abs() < 1e-8);
        assert!(BondLengths::<f64>::sample(2, 0.0, 1.0, 1).is_err());
        assert!(BondLengths::<f64>::sample(2, 2.0, 1.0, 1).is_err());
    }
}
