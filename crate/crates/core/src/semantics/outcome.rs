use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::Pos;

use super::step::RuntimeError;
use super::store::Store;

/// How one explored execution path ended.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    Final { store: Store },
    RuntimeError { error: RuntimeError },
    /// The path was still running when the step budget ran out.
    FuelExhausted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Final { store } => write!(f, "final {store}"),
            Outcome::RuntimeError { error } => write!(f, "error {error}"),
            Outcome::FuelExhausted => f.write_str("fuel-exhausted"),
        }
    }
}

/// A finite set of outcomes. Iteration order is final stores, then errors,
/// then fuel exhaustion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct OutcomeSet(BTreeSet<Outcome>);

impl OutcomeSet {
    pub fn new() -> Self {
        OutcomeSet::default()
    }

    pub fn insert(&mut self, o: Outcome) -> bool {
        self.0.insert(o)
    }

    pub fn extend(&mut self, other: OutcomeSet) {
        self.0.extend(other.0);
    }

    pub fn contains(&self, o: &Outcome) -> bool {
        self.0.contains(o)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Outcome> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fuel_exhausted(&self) -> bool {
        self.0.contains(&Outcome::FuelExhausted)
    }

    pub fn finals(&self) -> impl Iterator<Item = &Store> {
        self.0.iter().filter_map(|o| match o {
            Outcome::Final { store } => Some(store),
            _ => None,
        })
    }

    pub fn errors(&self) -> impl Iterator<Item = &RuntimeError> {
        self.0.iter().filter_map(|o| match o {
            Outcome::RuntimeError { error } => Some(error),
            _ => None,
        })
    }

    /// The same set without the fuel-exhaustion marker.
    pub fn terminated(&self) -> OutcomeSet {
        OutcomeSet(
            self.0
                .iter()
                .filter(|o| **o != Outcome::FuelExhausted)
                .cloned()
                .collect(),
        )
    }

    /// Restricts every final store to `vars`.
    pub fn restricted_to(&self, vars: &BTreeSet<String>) -> OutcomeSet {
        self.map(|o| match o {
            Outcome::Final { store } => Outcome::Final {
                store: store.restricted_to(vars),
            },
            other => other.clone(),
        })
    }

    /// Rewrites error positions through `renaming`; unmapped positions stay.
    pub fn relocate_errors(&self, renaming: &BTreeMap<Pos, Pos>) -> OutcomeSet {
        self.map(|o| match o {
            Outcome::RuntimeError { error } => Outcome::RuntimeError {
                error: RuntimeError {
                    kind: error.kind.clone(),
                    pos: *renaming.get(&error.pos).unwrap_or(&error.pos),
                },
            },
            other => other.clone(),
        })
    }

    fn map(&self, f: impl Fn(&Outcome) -> Outcome) -> OutcomeSet {
        OutcomeSet(self.0.iter().map(f).collect())
    }

    pub fn is_subset(&self, other: &OutcomeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Elements of `self` missing from `other`.
    pub fn difference<'a>(&'a self, other: &'a OutcomeSet) -> impl Iterator<Item = &'a Outcome> {
        self.0.difference(&other.0)
    }
}

impl FromIterator<Outcome> for OutcomeSet {
    fn from_iter<I: IntoIterator<Item = Outcome>>(iter: I) -> Self {
        OutcomeSet(iter.into_iter().collect())
    }
}

/// One line per final store, one per error, then `diverged yes|no`.
impl fmt::Display for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in self.0.iter().filter(|o| **o != Outcome::FuelExhausted) {
            writeln!(f, "{o}")?;
        }
        write!(f, "diverged {}", if self.fuel_exhausted() { "yes" } else { "no" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::ErrorKind;

    #[test]
    fn serialization_is_sorted() {
        let set: OutcomeSet = [
            Outcome::FuelExhausted,
            Outcome::RuntimeError {
                error: RuntimeError {
                    kind: ErrorKind::DivByZero,
                    pos: Pos::new(4, 3),
                },
            },
            Outcome::Final {
                store: Store::new().with("x", 2).with("ret", 1),
            },
            Outcome::Final {
                store: Store::new().with("x", 1).with("ret", 2),
            },
        ]
        .into_iter()
        .collect();
        assert_eq!(
            set.to_string(),
            "final {ret=1, x=2}\nfinal {ret=2, x=1}\nerror div-by-zero @ 4:3\ndiverged yes"
        );
        assert_eq!(set.terminated().to_string().lines().last(), Some("diverged no"));
    }
}
