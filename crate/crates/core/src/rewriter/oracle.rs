use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lang::FamilyProgram;
use crate::semantics::{semantics_over, variant_outcomes, Outcome, OutcomeSet, Store};

use super::reconfigure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// `Left` is the reconfigured program, `Right` the union over variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub outcome: Outcome,
    pub missing_from: Side,
    /// A variant producing the outcome, when it came from one.
    pub config: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub configs: usize,
    pub left_count: usize,
    pub right_count: usize,
    pub witness: Option<Witness>,
    pub left: OutcomeSet,
    pub right: OutcomeSet,
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict {}", self.verdict)?;
        writeln!(f, "configs {}", self.configs)?;
        writeln!(f, "left {}", self.left_count)?;
        writeln!(f, "right {}", self.right_count)?;
        if let Some(w) = &self.witness {
            write!(f, "witness {} missing from {}", w.outcome, w.missing_from)?;
            if let Some(k) = &w.config {
                write!(f, " (config {k})")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "-- left")?;
        writeln!(f, "{}", self.left)?;
        writeln!(f, "-- right")?;
        write!(f, "{}", self.right)
    }
}

/// One store binding every family variable to 0.
pub fn default_stores(p: &FamilyProgram) -> Vec<Store> {
    vec![Store::zeroed(&p.variables())]
}

/// Compares the outcomes of the reconfigured program with the union of the
/// variants' outcomes, guard inlining enabled.
pub fn check_outcome_preservation(
    p: &FamilyProgram,
    stores: &[Store],
    fuel: u64,
) -> Result<EquivalenceReport> {
    check_outcome_preservation_with(p, stores, fuel, true)
}

pub fn check_outcome_preservation_with(
    p: &FamilyProgram,
    stores: &[Store],
    fuel: u64,
    optimize: bool,
) -> Result<EquivalenceReport> {
    if stores.is_empty() {
        return Err(Error::malformed("at least one initial store is required"));
    }
    let rewritten = reconfigure(p, optimize)?;
    let mut observed: BTreeSet<String> = p.variables();
    for s in stores {
        observed.extend(s.vars());
    }

    let left = semantics_over(&rewritten.program, stores, fuel).restricted_to(&observed);
    let per_variant: Vec<_> = variant_outcomes(p, stores, fuel)?
        .into_iter()
        .map(|(k, o)| (k, o.relocate_errors(&rewritten.moved).restricted_to(&observed)))
        .collect();
    let mut right = OutcomeSet::new();
    for (_, o) in &per_variant {
        right.extend(o.clone());
    }

    let (verdict, witness) = if left.fuel_exhausted() || right.fuel_exhausted() {
        (Verdict::Inconclusive, None)
    } else if let Some(o) = right.difference(&left).next() {
        let config = per_variant
            .iter()
            .find(|(_, set)| set.contains(o))
            .map(|(k, _)| k.to_string());
        let w = Witness {
            outcome: o.clone(),
            missing_from: Side::Left,
            config,
        };
        (Verdict::Fail, Some(w))
    } else if let Some(o) = left.difference(&right).next() {
        let w = Witness {
            outcome: o.clone(),
            missing_from: Side::Right,
            config: None,
        };
        (Verdict::Fail, Some(w))
    } else {
        (Verdict::Pass, None)
    };

    Ok(EquivalenceReport {
        verdict,
        configs: per_variant.len(),
        left_count: left.len(),
        right_count: right.len(),
        witness,
        left,
        right,
    })
}
