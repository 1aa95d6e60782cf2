//! Products of supertraces as cyclic item lists.

use crate::error::{Error, Result};

/// Maximum number of `ψ` slots in a pattern.
pub const MAX_PSI_SLOTS: usize = 12;

/// One factor inside a supertrace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Psi,
    PsiTilde,
    /// `𝓑`, mixes bond indices.
    Prop,
    /// `𝓑†`.
    PropDag,
    /// Superspace source matrix; diagonal in the bond index.
    Source,
}

impl Item {
    /// Items that leave the bond index unchanged.
    pub fn is_bond_diagonal(self) -> bool {
        !matches!(self, Item::Prop | Item::PropDag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceRole {
    /// `STr(Σ₊₊ ψ ψ̃)`.
    RetardedSource,
    /// `STr(Σ′₋₋ ψ̃ ψ)`.
    AdvancedSource,
    /// `STr(ψψ̃)ⁿ`.
    Plain,
    /// `STr(𝓑ψ𝓑†ψ̃)ˡ`.
    Dressed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub role: TraceRole,
    pub items: Vec<Item>,
}

impl Trace {
    pub fn retarded_source() -> Self {
        Self { role: TraceRole::RetardedSource, items: vec![Item::Source, Item::Psi, Item::PsiTilde] }
    }

    pub fn advanced_source() -> Self {
        Self { role: TraceRole::AdvancedSource, items: vec![Item::Source, Item::PsiTilde, Item::Psi] }
    }

    pub fn plain(n: usize) -> Self {
        Self { role: TraceRole::Plain, items: [Item::Psi, Item::PsiTilde].repeat(n) }
    }

    pub fn dressed(l: usize) -> Self {
        Self { role: TraceRole::Dressed, items: [Item::Prop, Item::Psi, Item::PropDag, Item::PsiTilde].repeat(l) }
    }

    pub fn count(&self, item: Item) -> usize {
        self.items.iter().filter(|&&i| i == item).count()
    }
}

/// Two source traces followed by plain and dressed traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracePattern {
    traces: Vec<Trace>,
}

impl TracePattern {
    pub fn new(traces: Vec<Trace>) -> Result<Self> {
        let roles = |r: TraceRole| traces.iter().filter(|t| t.role == r).count();
        if roles(TraceRole::RetardedSource) != 1 || roles(TraceRole::AdvancedSource) != 1 {
            return Err(Error::InvalidPattern("exactly one retarded and one advanced source trace required".into()));
        }
        for (i, t) in traces.iter().enumerate() {
            if t.items.is_empty() {
                return Err(Error::InvalidPattern(format!("trace {i} is empty")));
            }
            if t.count(Item::Psi) != t.count(Item::PsiTilde) {
                return Err(Error::InvalidPattern(format!(
                    "trace {i}: {} psi slots vs {} psi-tilde slots",
                    t.count(Item::Psi),
                    t.count(Item::PsiTilde)
                )));
            }
            if t.count(Item::Psi) == 0 {
                return Err(Error::InvalidPattern(format!("trace {i} has no field slots")));
            }
        }
        let total: usize = traces.iter().map(|t| t.count(Item::Psi)).sum();
        if total > MAX_PSI_SLOTS {
            return Err(Error::InvalidPattern(format!("{total} psi slots exceed the cap of {MAX_PSI_SLOTS}")));
        }
        Ok(Self { traces })
    }

    /// Sources times `Π STr(ψψ̃)^{nᵢ}` times `Π STr(𝓑ψ𝓑†ψ̃)^{lⱼ}`.
    pub fn standard(plain: &[usize], dressed: &[usize]) -> Result<Self> {
        if plain.iter().any(|&n| n < 1) || dressed.iter().any(|&l| l < 1) {
            return Err(Error::InvalidPattern("trace exponents must be positive".into()));
        }
        let mut traces = vec![Trace::retarded_source(), Trace::advanced_source()];
        traces.extend(plain.iter().map(|&n| Trace::plain(n)));
        traces.extend(dressed.iter().map(|&l| Trace::dressed(l)));
        Self::new(traces)
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn psi_slots(&self) -> usize {
        self.traces.iter().map(|t| t.count(Item::Psi)).sum()
    }

    /// `(trace, position)` of every occurrence of `item`, in trace order.
    pub fn slots(&self, item: Item) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (t, tr) in self.traces.iter().enumerate() {
            for (k, &it) in tr.items.iter().enumerate() {
                if it == item {
                    out.push((t, k));
                }
            }
        }
        out
    }

    pub fn has_propagators(&self) -> bool {
        self.traces.iter().any(|t| t.items.iter().any(|i| !i.is_bond_diagonal()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_patterns() {
        let p = TracePattern::standard(&[2, 2], &[]).unwrap();
        assert_eq!(p.traces().len(), 4);
        assert_eq!(p.psi_slots(), 6);
        let d = TracePattern::standard(&[], &[1]).unwrap();
        assert!(d.has_propagators());
        assert_eq!(d.psi_slots(), 3);
    }

    #[test]
    fn malformed_patterns() {
        let bad = Trace { role: TraceRole::Plain, items: vec![Item::Psi, Item::Psi, Item::PsiTilde] };
        let err = TracePattern::new(vec![Trace::retarded_source(), Trace::advanced_source(), bad]);
        assert!(matches!(err, Err(Error::InvalidPattern(_))));
        assert!(TracePattern::new(vec![Trace::retarded_source()]).is_err());
        assert!(TracePattern::standard(&[6, 5], &[]).is_err());
    }
}
