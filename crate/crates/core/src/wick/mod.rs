//! Wick contractions of supertrace products into sums over `W⁽ⁿ⁾` networks.

mod classify;
mod enumerate;
mod evaluate;
mod pattern;

pub use classify::{Edge, Factor, Network, SymbolicForm};
pub use enumerate::{
    all_pairings, enumerate_contractions, enumerate_with_stats, is_linked, pairing_network, superspace_weight,
    ContractionTerm, EnumerationStats, Hop,
};
pub use evaluate::{evaluate_brute_force, evaluate_network, evaluate_term, TermValue, WSet};
pub use pattern::{Item, Trace, TracePattern, TraceRole, MAX_PSI_SLOTS};
