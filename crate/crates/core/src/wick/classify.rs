//! Index networks of contracted terms and their canonical symbolic form.

use std::collections::BTreeMap;
use std::fmt;

/// Matrix attached to an edge `from → to` of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// `W⁽ⁿ⁾_{from,to}`.
    W(usize),
    /// `𝓑_{from,to}`.
    B,
    /// `conj(𝓑_{from,to})`, i.e. `𝓑†_{to,from}`.
    BConj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub factor: Factor,
    pub from: usize,
    pub to: usize,
}

/// Product of edge factors summed over all `vars` bond indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Network {
    pub vars: usize,
    pub edges: Vec<Edge>,
}

impl Network {
    pub fn new(vars: usize, edges: Vec<Edge>) -> Self {
        debug_assert!(edges.iter().all(|e| e.from < vars && e.to < vars));
        Self { vars, edges }
    }

    /// Highest `W` order used.
    pub fn max_order(&self) -> usize {
        self.edges
            .iter()
            .filter_map(|e| match e.factor {
                Factor::W(n) => Some(n),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn uses_propagator(&self) -> bool {
        self.edges.iter().any(|e| matches!(e.factor, Factor::B | Factor::BConj))
    }

    /// Merges `a →W⁽ᵖ⁾→ v →W⁽ᵠ⁾→ b` into `a →W⁽ᵖ⁺ᵠ⁾→ b` wherever `v`
    /// touches nothing else, then drops the freed indices.
    pub fn collapse(&self) -> Network {
        let mut edges = self.edges.clone();
        let mut alive = vec![true; self.vars];
        loop {
            let mut merged = false;
            for v in 0..self.vars {
                if !alive[v] {
                    continue;
                }
                let touching: Vec<usize> =
                    (0..edges.len()).filter(|&i| edges[i].from == v || edges[i].to == v).collect();
                if touching.len() != 2 {
                    continue;
                }
                let (e0, e1) = (edges[touching[0]], edges[touching[1]]);
                let (inc, out) = match (e0.to == v && e0.from != v, e1.from == v && e1.to != v) {
                    (true, true) => (e0, e1),
                    _ if e1.to == v && e1.from != v && e0.from == v && e0.to != v => (e1, e0),
                    _ => continue,
                };
                let (Factor::W(p), Factor::W(q)) = (inc.factor, out.factor) else { continue };
                let hi = touching[0].max(touching[1]);
                let lo = touching[0].min(touching[1]);
                edges.remove(hi);
                edges.remove(lo);
                edges.push(Edge { factor: Factor::W(p + q), from: inc.from, to: out.to });
                alive[v] = false;
                merged = true;
            }
            if !merged {
                break;
            }
        }
        let mut relabel = vec![usize::MAX; self.vars];
        let mut next = 0;
        for v in 0..self.vars {
            if alive[v] {
                relabel[v] = next;
                next += 1;
            }
        }
        let edges = edges
            .into_iter()
            .map(|e| Edge { factor: e.factor, from: relabel[e.from], to: relabel[e.to] })
            .collect();
        Network { vars: next, edges }
    }

    /// Smallest sorted edge list over all relabelings, searched within
    /// colour-refinement classes.
    pub fn canonical(&self) -> Network {
        let classes = refine(self);
        let mut best: Option<Vec<Edge>> = None;
        let mut labels = vec![0usize; self.vars];
        assign(&classes, 0, 0, &mut labels, &mut |labels| {
            let mut e: Vec<Edge> = self
                .edges
                .iter()
                .map(|e| Edge { factor: e.factor, from: labels[e.from], to: labels[e.to] })
                .collect();
            e.sort();
            if best.as_ref().map_or(true, |b| e < *b) {
                best = Some(e);
            }
        });
        Network { vars: self.vars, edges: best.unwrap_or_default() }
    }
}

/// Colour classes of the variables, ordered by an isomorphism-invariant key.
fn refine(net: &Network) -> Vec<Vec<usize>> {
    let mut colour = vec![0usize; net.vars];
    let mut count = 1;
    loop {
        let sigs: Vec<(usize, Vec<(Factor, u8, usize)>)> = (0..net.vars)
            .map(|v| {
                let mut s: Vec<(Factor, u8, usize)> = net
                    .edges
                    .iter()
                    .filter_map(|e| match (e.from == v, e.to == v) {
                        (true, true) => Some((e.factor, 2, colour[v])),
                        (true, false) => Some((e.factor, 0, colour[e.to])),
                        (false, true) => Some((e.factor, 1, colour[e.from])),
                        _ => None,
                    })
                    .collect();
                s.sort();
                (colour[v], s)
            })
            .collect();
        let mut keys: Vec<_> = sigs.clone();
        keys.sort();
        keys.dedup();
        let index: BTreeMap<_, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
        colour = sigs.iter().map(|s| index[s]).collect();
        let new_count = index.len();
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut classes = vec![Vec::new(); count];
    for (v, &c) in colour.iter().enumerate() {
        classes[c].push(v);
    }
    classes.retain(|c| !c.is_empty());
    classes
}

fn assign(classes: &[Vec<usize>], ci: usize, base: usize, labels: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    if ci == classes.len() {
        visit(labels);
        return;
    }
    let members = &classes[ci];
    let mut perm: Vec<usize> = (0..members.len()).collect();
    loop {
        for (slot, &m) in perm.iter().zip(members) {
            labels[m] = base + slot;
        }
        assign(classes, ci + 1, base + members.len(), labels, visit);
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Canonical collapsed network of a contraction term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicForm {
    network: Network,
}

impl SymbolicForm {
    /// Collapses and canonicalises an arbitrary network.
    pub fn from_network(net: &Network) -> Self {
        Self { network: net.collapse().canonical() }
    }

    /// Convenience constructor from `(factor, from, to)` triples.
    pub fn from_edges(vars: usize, edges: &[(Factor, usize, usize)]) -> Self {
        let edges = edges.iter().map(|&(factor, from, to)| Edge { factor, from, to }).collect();
        Self::from_network(&Network::new(vars, edges))
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn max_order(&self) -> usize {
        self.network.max_order()
    }
}

impl fmt::Display for SymbolicForm {
    /// e.g. `sum[i0,i1] W3(i0,i0) W(i0,i1) W(i1,i0) W(i1,i1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = (0..self.network.vars).map(|v| format!("i{v}")).collect();
        write!(f, "sum[{}]", idx.join(","))?;
        for e in &self.network.edges {
            let name = match e.factor {
                Factor::W(1) => "W".to_string(),
                Factor::W(n) => format!("W{n}"),
                Factor::B => "B".to_string(),
                Factor::BConj => "Bc".to_string(),
            };
            write!(f, " {name}(i{},i{})", e.from, e.to)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Factor::W;

    #[test]
    fn two_hops_become_second_order() {
        // Σ_σ W_ρσ W_στ with ρ, τ kept by self-loops
        let net = Network::new(
            3,
            vec![
                Edge { factor: W(1), from: 0, to: 1 },
                Edge { factor: W(1), from: 1, to: 2 },
                Edge { factor: W(1), from: 0, to: 0 },
                Edge { factor: W(1), from: 2, to: 2 },
            ],
        );
        let c = net.collapse();
        assert_eq!(c.vars, 2);
        assert!(c.edges.contains(&Edge { factor: W(2), from: 0, to: 1 }));
    }

    #[test]
    fn closed_chain_becomes_trace() {
        let net = Network::new(2, vec![Edge { factor: W(1), from: 0, to: 1 }, Edge { factor: W(1), from: 1, to: 0 }]);
        let f = SymbolicForm::from_network(&net);
        assert_eq!(f.to_string(), "sum[i0] W2(i0,i0)");
    }

    #[test]
    fn relabeling_invariance() {
        let a = SymbolicForm::from_edges(2, &[(W(3), 0, 0), (W(1), 0, 1), (W(1), 1, 0), (W(1), 1, 1)]);
        let b = SymbolicForm::from_edges(2, &[(W(3), 1, 1), (W(1), 1, 0), (W(1), 0, 1), (W(1), 0, 0)]);
        assert_eq!(a, b);
        let c = SymbolicForm::from_edges(2, &[(W(2), 0, 0), (W(2), 1, 1), (W(1), 0, 1), (W(1), 1, 0)]);
        assert_ne!(a, c);
    }

    #[test]
    fn permutations_enumerated() {
        let mut p = vec![0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 6);
    }
}
