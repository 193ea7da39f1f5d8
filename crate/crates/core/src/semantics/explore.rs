use std::collections::HashSet;

use crate::lang::Stmt;

use super::outcome::{Outcome, OutcomeSet};
use super::step::{step, MachineConfig, Transition};
use super::store::Store;

/// Step budget per explored path unless the caller picks another.
pub const DEFAULT_FUEL: u64 = 10_000;

/// All outcomes of running `s` from `store`.
///
/// Exploration is breadth-first; identical configurations reached at the same
/// depth are merged. A path still running after `fuel` steps contributes
/// [`Outcome::FuelExhausted`].
pub fn collect_outcomes(s: &Stmt, store: &Store, fuel: u64) -> OutcomeSet {
    explore(s, store, fuel, |_| {})
}

/// Union of [`collect_outcomes`] over `stores`.
pub fn semantics_over(s: &Stmt, stores: &[Store], fuel: u64) -> OutcomeSet {
    let mut out = OutcomeSet::new();
    for store in stores {
        out.extend(collect_outcomes(s, store, fuel));
    }
    out
}

/// [`collect_outcomes`] that also hands every explored configuration to
/// `visit`.
pub(crate) fn explore(
    s: &Stmt,
    store: &Store,
    fuel: u64,
    mut visit: impl FnMut(&MachineConfig),
) -> OutcomeSet {
    let mut outcomes = OutcomeSet::new();
    let mut frontier = vec![MachineConfig::new(s.clone(), store.clone())];
    let mut steps = 0;
    while !frontier.is_empty() && steps < fuel {
        let mut next = HashSet::new();
        for cfg in &frontier {
            visit(cfg);
            for t in step(cfg) {
                match t {
                    Transition::Next(c) => {
                        next.insert(c);
                    }
                    Transition::Done(store) => {
                        outcomes.insert(Outcome::Final { store });
                    }
                    Transition::Fault(error) => {
                        outcomes.insert(Outcome::RuntimeError { error });
                    }
                }
            }
        }
        frontier = next.into_iter().collect();
        steps += 1;
    }
    if !frontier.is_empty() {
        outcomes.insert(Outcome::FuelExhausted);
    }
    outcomes
}
