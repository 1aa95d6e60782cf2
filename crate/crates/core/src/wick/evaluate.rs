//! Numerical evaluation of index networks.

use num_complex::Complex;

use super::classify::{Factor, Network};
use super::enumerate::ContractionTerm;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::perron::WMatrix;
use crate::scalar::{Real, Scalar};
use crate::scattering::PropagationMatrix;

/// Largest index-tuple count accepted by brute-force summation.
const BRUTE_FORCE_LIMIT: f64 = 2e8;

/// Matrices a network may reference.
#[derive(Debug, Clone, Copy)]
pub struct WSet<'a, T> {
    /// `W⁽¹⁾, W⁽²⁾, …` in order.
    pub w: &'a [WMatrix<T>],
    pub bcal: Option<&'a PropagationMatrix<T>>,
}

impl<'a, T: Real> WSet<'a, T> {
    pub fn new(w: &'a [WMatrix<T>], bcal: Option<&'a PropagationMatrix<T>>) -> Self {
        Self { w, bcal }
    }

    fn dim(&self) -> Result<usize> {
        self.w.first().map(WMatrix::dim).ok_or_else(|| Error::InvalidArgument("no W matrices supplied".into()))
    }

    fn check(&self, net: &Network) -> Result<()> {
        for e in &net.edges {
            match e.factor {
                Factor::W(n) => {
                    if n == 0 || self.w.get(n - 1).map(WMatrix::order) != Some(n) {
                        return Err(Error::InvalidArgument(format!("W order {n} not supplied")));
                    }
                }
                Factor::B | Factor::BConj => {
                    if self.bcal.is_none() {
                        return Err(Error::InvalidArgument("network needs the propagation matrix".into()));
                    }
                }
            }
        }
        let n = self.dim()?;
        if let Some(b) = self.bcal {
            if b.dim() != n {
                return Err(Error::InvalidArgument("propagation matrix and W differ in dimension".into()));
            }
        }
        Ok(())
    }

    fn real(&self, f: Factor) -> Mat<T> {
        match f {
            Factor::W(n) => self.w[n - 1].matrix().clone(),
            _ => unreachable!("real path used with propagator factor"),
        }
    }

    fn complex(&self, f: Factor) -> Mat<Complex<T>> {
        match f {
            Factor::W(n) => self.w[n - 1].matrix().to_complex(),
            Factor::B => self.bcal.expect("checked").matrix().clone(),
            Factor::BConj => self.bcal.expect("checked").matrix().map(|z| z.conj()),
        }
    }

    fn entry(&self, f: Factor, i: usize, j: usize) -> Complex<T> {
        match f {
            Factor::W(n) => Complex::new(self.w[n - 1].matrix()[(i, j)], T::zero()),
            Factor::B => self.bcal.expect("checked").matrix()[(i, j)],
            Factor::BConj => self.bcal.expect("checked").matrix()[(i, j)].conj(),
        }
    }
}

/// Value of one class of a contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct TermValue<T> {
    pub term_id: usize,
    pub form: String,
    /// Network value times the prefactor.
    pub class_value: Complex<T>,
    /// `class_value` times the multiplicity.
    pub total: Complex<T>,
    pub two_b: usize,
}

pub fn evaluate_term<T: Real>(term: &ContractionTerm, set: WSet<'_, T>, prefactor: T) -> Result<TermValue<T>> {
    let v = evaluate_network(term.form.network(), set)? * prefactor;
    Ok(TermValue {
        term_id: term.id,
        form: term.form.to_string(),
        class_value: v,
        total: v * T::count(term.multiplicity),
        two_b: set.dim()?,
    })
}

/// Contracts the network by elimination with matrix kernels.
pub fn evaluate_network<T: Real>(net: &Network, set: WSet<'_, T>) -> Result<Complex<T>> {
    set.check(net)?;
    let n = set.dim()?;
    if net.uses_propagator() {
        let edges = net.edges.iter().map(|e| (e.from, e.to, set.complex(e.factor))).collect();
        eliminate(net.vars, edges, n)
    } else {
        let edges = net.edges.iter().map(|e| (e.from, e.to, set.real(e.factor))).collect();
        eliminate(net.vars, edges, n).map(Complex::from_real)
    }
}

fn eliminate<S: Scalar>(vars: usize, mut edges: Vec<(usize, usize, Mat<S>)>, n: usize) -> Result<S> {
    let mut weights = vec![vec![S::one(); n]; vars];
    let mut alive = vec![true; vars];
    let mut scalar = S::one();
    loop {
        // self-loops become diagonal weights
        let mut i = 0;
        while i < edges.len() {
            if edges[i].0 == edges[i].1 {
                let (a, _, m) = edges.swap_remove(i);
                for (k, w) in weights[a].iter_mut().enumerate() {
                    *w *= m[(k, k)];
                }
            } else {
                i += 1;
            }
        }
        // parallel edges merge entrywise
        let mut i = 0;
        while i < edges.len() {
            let mut j = i + 1;
            while j < edges.len() {
                let (a, b) = (edges[i].0, edges[i].1);
                let (c, d) = (edges[j].0, edges[j].1);
                if (a, b) == (c, d) || (a, b) == (d, c) {
                    let (_, _, m) = edges.swap_remove(j);
                    let m = if (a, b) == (c, d) { m } else { m.transpose() };
                    edges[i].2 = edges[i].2.hadamard(&m);
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        let degree = |v: usize, edges: &[(usize, usize, Mat<S>)]| edges.iter().filter(|e| e.0 == v || e.1 == v).count();
        let Some(v) = (0..vars).filter(|&v| alive[v]).min_by_key(|&v| degree(v, &edges)) else { break };
        let touching: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].0 == v || edges[i].1 == v).collect();
        match touching.len() {
            0 => {
                scalar *= weights[v].iter().copied().sum::<S>();
                alive[v] = false;
            }
            1 => {
                let (a, b, m) = edges.swap_remove(touching[0]);
                let (other, vec) = if a == v { (b, m.vecmat(&weights[v])) } else { (a, m.matvec(&weights[v])) };
                for (w, x) in weights[other].iter_mut().zip(vec) {
                    *w *= x;
                }
                alive[v] = false;
            }
            2 => {
                let (hi, lo) = (touching[0].max(touching[1]), touching[0].min(touching[1]));
                let e2 = edges.swap_remove(hi);
                let e1 = edges.swap_remove(lo);
                // rows: other end of e1, columns: v
                let (b, left) = if e1.1 == v { (e1.0, e1.2) } else { (e1.1, e1.2.transpose()) };
                // rows: v, columns: other end of e2
                let (c, right) = if e2.0 == v { (e2.1, e2.2) } else { (e2.0, e2.2.transpose()) };
                let mut scaled = right;
                for k in 0..n {
                    let w = weights[v][k];
                    for x in scaled.row_mut(k) {
                        *x *= w;
                    }
                }
                edges.push((b, c, left.matmul(&scaled)));
                alive[v] = false;
            }
            _ => {
                let rest: Vec<usize> = (0..vars).filter(|&u| alive[u]).collect();
                return Ok(scalar * brute(&rest, &weights, &edges, n)?);
            }
        }
    }
    Ok(scalar)
}

fn brute<S: Scalar>(vars: &[usize], weights: &[Vec<S>], edges: &[(usize, usize, Mat<S>)], n: usize) -> Result<S> {
    let tuples = (n as f64).powi(vars.len() as i32);
    if tuples > BRUTE_FORCE_LIMIT {
        return Err(Error::InvalidArgument(format!("network too dense: {tuples:e} index tuples")));
    }
    let slot = |v: usize| vars.iter().position(|&u| u == v).expect("alive variable");
    let mut idx = vec![0usize; vars.len()];
    let mut acc = S::zero();
    loop {
        let mut term = S::one();
        for (k, &v) in vars.iter().enumerate() {
            term *= weights[v][idx[k]];
        }
        for (a, b, m) in edges {
            term *= m[(idx[slot(*a)], idx[slot(*b)])];
        }
        acc += term;
        if !odometer(&mut idx, n) {
            break;
        }
    }
    Ok(acc)
}

fn odometer(idx: &mut [usize], n: usize) -> bool {
    for x in idx.iter_mut() {
        *x += 1;
        if *x < n {
            return true;
        }
        *x = 0;
    }
    false
}

/// Explicit summation over every index tuple.
pub fn evaluate_brute_force<T: Real>(net: &Network, set: WSet<'_, T>) -> Result<Complex<T>> {
    set.check(net)?;
    let n = set.dim()?;
    let tuples = (n as f64).powi(net.vars as i32);
    if tuples > BRUTE_FORCE_LIMIT {
        return Err(Error::InvalidArgument(format!("brute force over {tuples:e} index tuples refused")));
    }
    let mut idx = vec![0usize; net.vars];
    let mut acc = Complex::new(T::zero(), T::zero());
    loop {
        let mut term = Complex::new(T::one(), T::zero());
        for e in &net.edges {
            term = term * set.entry(e.factor, idx[e.from], idx[e.to]);
        }
        acc = acc + term;
        if !odometer(&mut idx, n) {
            break;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perron::{spectral_gap, GapMethod, PfOperator, PfResolvent};
    use crate::scattering::VertexKind;
    use crate::wick::{enumerate_contractions, pairing_network, SymbolicForm, TracePattern};

    fn setup(v: usize) -> (PropagationMatrix<f64>, Vec<WMatrix<f64>>) {
        let b = PropagationMatrix::complete(v, VertexKind::Dft).unwrap();
        let f = PfOperator::from_propagation(&b).unwrap();
        let g = spectral_gap(&f, GapMethod::Dense).unwrap();
        let ws = PfResolvent::new(&f, &g).unwrap().w_series(4).unwrap();
        (b, ws)
    }

    #[test]
    fn source_term_on_rank_one_operator() {
        let f = PfOperator::from_matrix(Mat::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()).unwrap();
        let g = spectral_gap(&f, GapMethod::Dense).unwrap();
        let ws = PfResolvent::new(&f, &g).unwrap().w_series(2).unwrap();
        let terms = enumerate_contractions(&TracePattern::standard(&[], &[]).unwrap()).unwrap();
        let v = evaluate_term(&terms[0], WSet::new(&ws, None), 1.0f64).unwrap();
        assert!((v.class_value.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn elimination_matches_brute_force() {
        let (b, ws) = setup(3);
        for (plain, dressed) in [(vec![2], vec![]), (vec![2, 2], vec![]), (vec![], vec![1]), (vec![2], vec![1])] {
            let p = TracePattern::standard(&plain, &dressed).unwrap();
            for t in enumerate_contractions(&p).unwrap() {
                let set = WSet::new(&ws, Some(&b));
                let fast = evaluate_network(t.form.network(), set).unwrap();
                let slow = evaluate_brute_force(&pairing_network(&p, &t.pairing), set).unwrap();
                assert!((fast - slow).norm() < 1e-10 * (1.0 + slow.norm()), "{} {fast} {slow}", t.form);
            }
        }
    }

    #[test]
    fn missing_order_rejected() {
        let (_, ws) = setup(3);
        let form = SymbolicForm::from_edges(1, &[(Factor::W(5), 0, 0)]);
        assert!(matches!(evaluate_network(form.network(), WSet::new(&ws, None)), Err(Error::InvalidArgument(_))));
        let form = SymbolicForm::from_edges(2, &[(Factor::B, 0, 1), (Factor::W(1), 1, 0)]);
        assert!(evaluate_network(form.network(), WSet::new(&ws, None)).is_err());
    }
}
