use std::collections::BTreeSet;
use std::fmt;
use std::ops::Not;

use serde::Serialize;

use crate::error::Result;
use crate::featexp::{sat, FeatExp};
use crate::lang::RESERVED_MARKER;

/// One `(variable, presence condition) ↦ fresh name` entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub var: String,
    #[serde(serialize_with = "crate::rewriter::env::ser_fexp")]
    pub pc: FeatExp,
    pub fresh: String,
}

pub(crate) fn ser_fexp<S: serde::Serializer>(e: &FeatExp, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

/// Rename environment for conditionally declared variables.
///
/// Entries are kept in declaration order, outermost first; the environment is
/// threaded functionally so leaving a scope restores the outer mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RenameEnv {
    entries: Vec<Binding>,
}

/// Where a use of a variable resolves for the configurations in `pc`:
/// a fresh name, or (`None`) the variable itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub pc: FeatExp,
    pub target: Option<String>,
}

impl RenameEnv {
    pub fn new() -> Self {
        RenameEnv::default()
    }

    pub fn entries(&self) -> &[Binding] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `self[(var, pc) ↦ fresh]`; an equal key declared later shadows.
    pub fn extended(&self, var: &str, pc: &FeatExp, fresh: &str) -> RenameEnv {
        let mut entries = self.entries.clone();
        entries.push(Binding {
            var: var.to_string(),
            pc: pc.clone(),
            fresh: fresh.to_string(),
        });
        RenameEnv { entries }
    }

    /// Drops every entry for `var`, as an unconditional declaration of `var`
    /// hides them.
    pub fn without(&self, var: &str) -> RenameEnv {
        RenameEnv {
            entries: self.entries.iter().filter(|b| b.var != var).cloned().collect(),
        }
    }

    pub fn tracks(&self, var: &str) -> bool {
        self.entries.iter().any(|b| b.var == var)
    }

    /// The presence conditions recorded for `var`.
    pub fn conditions(&self, var: &str) -> Vec<&FeatExp> {
        self.entries
            .iter()
            .filter(|b| b.var == var)
            .map(|b| &b.pc)
            .collect()
    }

    /// Innermost fresh name recorded for exactly `(var, pc)`.
    pub fn lookup(&self, var: &str, pc: &FeatExp) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|b| b.var == var && &b.pc == pc)
            .map(|b| b.fresh.as_str())
    }

    pub fn range(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|b| b.fresh.as_str()).collect()
    }

    /// Splits the configurations of `context` by which declaration a use of
    /// `var` refers to: the innermost entry whose condition holds, or the
    /// variable itself when none does. Only regions satisfiable together
    /// with `context` are returned, outer entries first and the variable
    /// itself last. Negated conditions that cannot overlap are left out of
    /// each region's formula.
    pub fn regions(&self, var: &str, context: &FeatExp, universe: &[String]) -> Result<Vec<Region>> {
        let scoped: Vec<&Binding> = self.entries.iter().filter(|b| b.var == var).collect();
        let with_ctx = |e: FeatExp| -> FeatExp {
            if context.is_true() {
                e
            } else {
                context.clone().and(e)
            }
        };
        let mut out = Vec::new();
        for (i, b) in scoped.iter().enumerate() {
            let mut parts = vec![b.pc.clone()];
            for inner in &scoped[i + 1..] {
                if sat(&with_ctx(b.pc.clone().and(inner.pc.clone())), universe)? {
                    parts.push(inner.pc.clone().not());
                }
            }
            let pc = FeatExp::conjunction(parts);
            if sat(&with_ctx(pc.clone()), universe)? {
                out.push(Region {
                    pc: pc.simplify(),
                    target: Some(b.fresh.clone()),
                });
            }
        }
        let mut outside = Vec::new();
        for b in &scoped {
            if sat(&with_ctx(b.pc.clone()), universe)? {
                outside.push(b.pc.clone().not());
            }
        }
        let pc = FeatExp::conjunction(outside);
        if sat(&with_ctx(pc.clone()), universe)? {
            out.push(Region {
                pc: pc.simplify(),
                target: None,
            });
        }
        Ok(out)
    }
}

impl fmt::Display for RenameEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, b) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {}) ↦ {}", b.var, b.pc, b.fresh)?;
        }
        f.write_str("]")
    }
}

/// Hands out names of the shape `x__<hash of pc>__<n>`. The `__` marker is
/// rejected in family sources, so these never collide with user names.
#[derive(Debug, Clone, Default)]
pub struct FreshNameSupply {
    counter: u64,
    used: BTreeSet<String>,
}

fn fnv1a(text: &str) -> u32 {
    text.bytes().fold(0x811c_9dc5u32, |h, b| {
        (h ^ b as u32).wrapping_mul(0x0100_0193)
    })
}

impl FreshNameSupply {
    /// A supply that also avoids every name in `used`.
    pub fn avoiding(used: impl IntoIterator<Item = String>) -> Self {
        FreshNameSupply {
            counter: 0,
            used: used.into_iter().collect(),
        }
    }

    pub fn fresh(&mut self, var: &str, pc: &FeatExp) -> String {
        let hash = fnv1a(&pc.to_string());
        loop {
            self.counter += 1;
            let name = format!(
                "{var}{RESERVED_MARKER}{hash:08x}{RESERVED_MARKER}{}",
                self.counter
            );
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}
