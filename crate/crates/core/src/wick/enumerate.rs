//! Pairings of `ψ` with `ψ̃` slots, the linking rule, and term classes.

use std::collections::HashMap;

use super::classify::{Edge, Factor, Network, SymbolicForm};
use super::pattern::{Item, TracePattern};
use crate::error::Result;

/// One step of an index cycle: `ψ` slot contracted into a `ψ̃` slot, followed
/// by the non-field items met before the next `ψ` of that trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hop {
    pub psi: (usize, usize),
    pub tilde: (usize, usize),
    pub insertions: Vec<Item>,
}

/// Class of pairings sharing one symbolic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionTerm {
    pub id: usize,
    /// `pairing[i]` is the `ψ̃` slot contracted with the `i`-th `ψ` slot.
    pub pairing: Vec<usize>,
    pub cycles: Vec<Vec<Hop>>,
    pub form: SymbolicForm,
    pub multiplicity: usize,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Bond-index bookkeeping shared by all pairings of one pattern.
struct Layout<'a> {
    pattern: &'a TracePattern,
    offsets: Vec<usize>,
    psis: Vec<(usize, usize)>,
    tildes: Vec<(usize, usize)>,
    /// Bond variable of each position, before relabeling.
    var_of: Vec<usize>,
    vars: usize,
}

impl<'a> Layout<'a> {
    fn new(pattern: &'a TracePattern) -> Self {
        let mut offsets = Vec::new();
        let mut total = 0;
        for t in pattern.traces() {
            offsets.push(total);
            total += t.items.len();
        }
        let mut dsu = Dsu::new(total);
        for (t, tr) in pattern.traces().iter().enumerate() {
            let len = tr.items.len();
            for (k, item) in tr.items.iter().enumerate() {
                if item.is_bond_diagonal() {
                    dsu.union(offsets[t] + k, offsets[t] + (k + 1) % len);
                }
            }
        }
        let mut ids = HashMap::new();
        let var_of: Vec<usize> = (0..total)
            .map(|p| {
                let r = dsu.find(p);
                let n = ids.len();
                *ids.entry(r).or_insert(n)
            })
            .collect();
        Self {
            pattern,
            offsets,
            psis: pattern.slots(Item::Psi),
            tildes: pattern.slots(Item::PsiTilde),
            vars: ids.len(),
            var_of,
        }
    }

    fn pos(&self, t: usize, k: usize) -> usize {
        self.offsets[t] + k
    }

    fn next(&self, t: usize, k: usize) -> usize {
        (k + 1) % self.pattern.traces()[t].items.len()
    }

    /// Bond variable carried by a bond-diagonal item.
    fn item_var(&self, (t, k): (usize, usize)) -> usize {
        self.var_of[self.pos(t, k)]
    }

    /// Uncollapsed network: one `W` per contraction plus the propagator factors.
    fn network(&self, pairing: &[usize]) -> Network {
        let mut edges = Vec::new();
        for (i, &j) in pairing.iter().enumerate() {
            edges.push(Edge { factor: Factor::W(1), from: self.item_var(self.psis[i]), to: self.item_var(self.tildes[j]) });
        }
        for (t, tr) in self.pattern.traces().iter().enumerate() {
            for (k, item) in tr.items.iter().enumerate() {
                let (a, b) = (self.var_of[self.pos(t, k)], self.var_of[self.pos(t, self.next(t, k))]);
                match item {
                    Item::Prop => edges.push(Edge { factor: Factor::B, from: a, to: b }),
                    Item::PropDag => edges.push(Edge { factor: Factor::BConj, from: b, to: a }),
                    _ => {}
                }
            }
        }
        Network::new(self.vars, edges)
    }

    fn cycles(&self, pairing: &[usize]) -> Vec<Vec<Hop>> {
        let mut seen = vec![false; self.psis.len()];
        let mut out = Vec::new();
        for start in 0..self.psis.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                let tilde = self.tildes[pairing[i]];
                let (t, mut k) = tilde;
                let mut insertions = Vec::new();
                loop {
                    k = self.next(t, k);
                    let item = self.pattern.traces()[t].items[k];
                    if item == Item::Psi {
                        break;
                    }
                    insertions.push(item);
                }
                cycle.push(Hop { psi: self.psis[i], tilde, insertions });
                i = self.psis.iter().position(|&p| p == (t, k)).expect("psi slot");
            }
            out.push(cycle);
        }
        out
    }

    /// Every trace lies in the component of both sources.
    fn linked(&self, pairing: &[usize]) -> bool {
        let n = self.pattern.traces().len();
        let mut dsu = Dsu::new(n);
        for (i, &j) in pairing.iter().enumerate() {
            dsu.union(self.psis[i].0, self.tildes[j].0);
        }
        let root = dsu.find(0);
        (1..n).all(|t| dsu.find(t) == root)
    }

    /// True when some group of traces is already closed off from the rest.
    ///
    /// `assigned` covers the first `depth` `ψ` slots.
    fn hopeless(&self, assigned: &[usize], depth: usize, used: &[bool]) -> bool {
        let n = self.pattern.traces().len();
        let mut dsu = Dsu::new(n);
        for (i, &j) in assigned[..depth].iter().enumerate() {
            dsu.union(self.psis[i].0, self.tildes[j].0);
        }
        let mut open = vec![false; n];
        for (i, &(t, _)) in self.psis.iter().enumerate() {
            if i >= depth {
                let r = dsu.find(t);
                open[r] = true;
            }
        }
        for (j, &(t, _)) in self.tildes.iter().enumerate() {
            if !used[j] {
                let r = dsu.find(t);
                open[r] = true;
            }
        }
        let mut roots: Vec<usize> = (0..n).map(|t| dsu.find(t)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len() > 1 && roots.iter().any(|&r| !open[r])
    }
}

/// Statistics of one enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnumerationStats {
    /// Complete pairings reached.
    pub visited: usize,
    /// Complete pairings kept by the linking rule.
    pub linked: usize,
}

/// Linked pairings of `pattern`, grouped into classes by symbolic form.
pub fn enumerate_contractions(pattern: &TracePattern) -> Result<Vec<ContractionTerm>> {
    Ok(enumerate_with_stats(pattern)?.0)
}

pub fn enumerate_with_stats(pattern: &TracePattern) -> Result<(Vec<ContractionTerm>, EnumerationStats)> {
    let layout = Layout::new(pattern);
    let n = layout.psis.len();
    let mut terms: Vec<ContractionTerm> = Vec::new();
    let mut index: HashMap<SymbolicForm, usize> = HashMap::new();
    let mut stats = EnumerationStats::default();
    let mut pairing = vec![0usize; n];
    let mut used = vec![false; n];
    search(&layout, 0, &mut pairing, &mut used, &mut |p| {
        stats.visited += 1;
        if !layout.linked(p) {
            return;
        }
        stats.linked += 1;
        let form = SymbolicForm::from_network(&layout.network(p));
        match index.get(&form) {
            Some(&id) => terms[id].multiplicity += 1,
            None => {
                let id = terms.len();
                index.insert(form.clone(), id);
                terms.push(ContractionTerm {
                    id,
                    pairing: p.to_vec(),
                    cycles: layout.cycles(p),
                    form,
                    multiplicity: 1,
                });
            }
        }
    });
    Ok((terms, stats))
}

fn search(layout: &Layout, depth: usize, pairing: &mut [usize], used: &mut [bool], visit: &mut impl FnMut(&[usize])) {
    if depth == pairing.len() {
        visit(pairing);
        return;
    }
    for j in 0..used.len() {
        if used[j] {
            continue;
        }
        pairing[depth] = j;
        used[j] = true;
        if !layout.hopeless(pairing, depth + 1, used) {
            search(layout, depth + 1, pairing, used, visit);
        }
        used[j] = false;
    }
}

/// Uncollapsed network of a pairing, for brute-force evaluation.
pub fn pairing_network(pattern: &TracePattern, pairing: &[usize]) -> Network {
    Layout::new(pattern).network(pairing)
}

/// Every pairing of `pattern`, linked or not, in enumeration order.
pub fn all_pairings(pattern: &TracePattern) -> Vec<Vec<usize>> {
    let n = pattern.psi_slots();
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        if !next_perm(&mut p) {
            break;
        }
    }
    out
}

fn next_perm(p: &mut [usize]) -> bool {
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

/// Whether `pairing` passes the linking rule.
pub fn is_linked(pattern: &TracePattern, pairing: &[usize]) -> bool {
    Layout::new(pattern).linked(pairing)
}

/// Superspace weight of a pairing.
///
/// Each closed superspace index loop contributes `Σ_s (−1)^s Π σ_s` over the
/// source matrices it passes, with `σ = diag(1, 0)`. A loop without a source
/// therefore gives `1 − 1 = 0`.
pub fn superspace_weight(pattern: &TracePattern, pairing: &[usize]) -> i64 {
    let layout = Layout::new(pattern);
    let total = layout.var_of.len();
    let mut dsu = Dsu::new(total);
    for (t, tr) in pattern.traces().iter().enumerate() {
        for (k, item) in tr.items.iter().enumerate() {
            if !matches!(item, Item::Psi | Item::PsiTilde) {
                dsu.union(layout.pos(t, k), layout.pos(t, layout.next(t, k)));
            }
        }
    }
    for (i, &j) in pairing.iter().enumerate() {
        let (a, ka) = layout.psis[i];
        let (b, kb) = layout.tildes[j];
        dsu.union(layout.pos(a, ka), layout.pos(b, layout.next(b, kb)));
        dsu.union(layout.pos(a, layout.next(a, ka)), layout.pos(b, kb));
    }
    let mut sources: HashMap<usize, usize> = HashMap::new();
    for p in 0..total {
        let r = dsu.find(p);
        sources.entry(r).or_insert(0);
    }
    for (t, tr) in pattern.traces().iter().enumerate() {
        for (k, item) in tr.items.iter().enumerate() {
            if *item == Item::Source {
                let r = dsu.find(layout.pos(t, k));
                *sources.get_mut(&r).expect("loop") += 1;
            }
        }
    }
    let sigma = [1i64, 0];
    sources
        .values()
        .map(|&count| (0..2).map(|s| if s == 0 { 1 } else { -1 } * sigma[s].pow(count as u32)).sum::<i64>())
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_only_has_one_class() {
        let p = TracePattern::standard(&[], &[]).unwrap();
        let (terms, stats) = enumerate_with_stats(&p).unwrap();
        assert_eq!(stats.visited, 1);
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].form.to_string(), "sum[i0] W2(i0,i0)");
        let pairs = all_pairings(&p);
        assert_eq!(pairs.len(), 2);
        let discarded: Vec<_> = pairs.iter().filter(|q| !is_linked(&p, q)).collect();
        assert_eq!(discarded.len(), 1);
        assert_eq!(superspace_weight(&p, discarded[0]), 0);
        assert_ne!(superspace_weight(&p, &terms[0].pairing), 0);
    }

    #[test]
    fn one_plain_trace_has_two_classes() {
        let p = TracePattern::standard(&[2], &[]).unwrap();
        let terms = enumerate_contractions(&p).unwrap();
        let forms: Vec<String> = terms.iter().map(|t| t.form.to_string()).collect();
        assert_eq!(terms.len(), 2, "{forms:?}");
    }

    #[test]
    fn cycles_cover_all_slots() {
        let p = TracePattern::standard(&[2], &[1]).unwrap();
        for t in enumerate_contractions(&p).unwrap() {
            let hops: usize = t.cycles.iter().map(Vec::len).sum();
            assert_eq!(hops, p.psi_slots());
        }
    }

    #[test]
    fn pruning_matches_exhaustive_filter() {
        let p = TracePattern::standard(&[2, 2], &[]).unwrap();
        let (_, stats) = enumerate_with_stats(&p).unwrap();
        let linked = all_pairings(&p).iter().filter(|q| is_linked(&p, q)).count();
        assert_eq!(stats.linked, linked);
        assert!(stats.visited <= 720);
    }
}
