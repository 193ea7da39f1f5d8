use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::Pos;
use crate::lang::{Expr, Stmt};
use crate::semantics::{
    eval_replay, step_traced, ErrorKind, MachineConfig, Outcome, RuntimeError, Store, Transition,
};

/// A path to a division by zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorWitness {
    pub pos: Pos,
    /// Values drawn by `or` for declared or assigned variables along the
    /// path, such as the feature variables.
    pub bindings: BTreeMap<String, i64>,
    /// Every `or` branch taken, in execution order (false = left).
    pub choices: Vec<bool>,
    pub initial_store: Store,
}

impl fmt::Display for ErrorWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bindings.iter().map(|(x, v)| format!("{x}={v}")).collect();
        write!(f, "DIV0 @ {} with {{{}}}", self.pos, parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivZeroReport {
    pub witnesses: Vec<ErrorWitness>,
    pub fuel_exhausted: bool,
}

impl fmt::Display for DivZeroReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.witnesses {
            writeln!(f, "{w}")?;
        }
        if self.witnesses.is_empty() {
            writeln!(f, "no division by zero")?;
        }
        write!(f, "fuel exhausted {}", if self.fuel_exhausted { "yes" } else { "no" })
    }
}

/// Variables bound from an `or` during one step, in evaluation order.
/// Walks the statements the step executes, consuming `choices` exactly as
/// the step did.
fn bindings_of_step(stmt: &Stmt, store: &Store, choices: &[bool]) -> Vec<(String, i64)> {
    fn walk(
        s: &Stmt,
        store: &mut Store,
        bits: &mut std::slice::Iter<'_, bool>,
        out: &mut Vec<(String, i64)>,
    ) -> Option<()> {
        let mut eval = |e: &Expr, store: &Store| eval_replay(e, store, &mut bits.by_ref().copied());
        match s {
            Stmt::Seq(first, _) => walk(first, store, bits, out),
            Stmt::Assign { target, rhs, .. } => {
                let v = eval(rhs, store)?;
                if let (true, Ok(n)) = (rhs.has_choice(), v) {
                    out.push((target.clone(), n));
                }
                Some(())
            }
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => eval(cond, store).map(|_| ()),
            Stmt::VarDecl { name, init, body, .. } => {
                let n = eval(init, store)?.ok()?;
                if init.has_choice() {
                    out.push((name.clone(), n));
                }
                store.set(name.clone(), n);
                walk(body, store, bits, out)
            }
            _ => Some(()),
        }
    }
    let mut out = Vec::new();
    let mut store = store.clone();
    walk(stmt, &mut store, &mut choices.iter(), &mut out);
    out
}

#[derive(Clone)]
struct Path {
    cfg: MachineConfig,
    bindings: BTreeMap<String, i64>,
    choices: Vec<bool>,
}

/// Exhaustive search for divisions by zero, one witness per distinct
/// (location, bindings).
pub fn div_zero_check(s: &Stmt, stores: &[Store], fuel: u64) -> DivZeroReport {
    let mut found: BTreeMap<(Pos, BTreeMap<String, i64>), ErrorWitness> = BTreeMap::new();
    let mut fuel_exhausted = false;
    for store in stores {
        let mut frontier = vec![Path {
            cfg: MachineConfig::new(s.clone(), store.clone()),
            bindings: BTreeMap::new(),
            choices: Vec::new(),
        }];
        let mut steps = 0;
        while !frontier.is_empty() && steps < fuel {
            let mut seen = HashSet::new();
            let mut next = Vec::new();
            for path in &frontier {
                for t in step_traced(&path.cfg) {
                    let mut bindings = path.bindings.clone();
                    bindings.extend(bindings_of_step(&path.cfg.stmt, &path.cfg.store, &t.choices));
                    let mut choices = path.choices.clone();
                    choices.extend_from_slice(&t.choices);
                    match t.transition {
                        Transition::Next(cfg) => {
                            if seen.insert((cfg.clone(), bindings.clone())) {
                                next.push(Path { cfg, bindings, choices });
                            }
                        }
                        Transition::Fault(RuntimeError {
                            kind: ErrorKind::DivByZero,
                            pos,
                        }) => {
                            found.entry((pos, bindings.clone())).or_insert(ErrorWitness {
                                pos,
                                bindings,
                                choices,
                                initial_store: store.clone(),
                            });
                        }
                        _ => {}
                    }
                }
            }
            frontier = next;
            steps += 1;
        }
        fuel_exhausted |= !frontier.is_empty();
    }
    DivZeroReport {
        witnesses: found.into_values().collect(),
        fuel_exhausted,
    }
}

/// Runs `s` from `store`, resolving every `or` from `choices`. `None` if the
/// choices do not describe a complete path within `fuel` steps.
pub fn replay(s: &Stmt, store: &Store, choices: &[bool], fuel: u64) -> Option<Outcome> {
    let mut cfg = MachineConfig::new(s.clone(), store.clone());
    let mut rest = choices;
    for _ in 0..fuel {
        let t = step_traced(&cfg)
            .into_iter()
            .find(|t| rest.starts_with(&t.choices))?;
        rest = &rest[t.choices.len()..];
        match t.transition {
            Transition::Next(c) => cfg = c,
            Transition::Done(store) => return rest.is_empty().then_some(Outcome::Final { store }),
            Transition::Fault(error) => return rest.is_empty().then_some(Outcome::RuntimeError { error }),
        }
    }
    None
}

/// Locations of statements executed on at least one explored path.
pub fn reachable_statements(s: &Stmt, stores: &[Store], fuel: u64) -> BTreeSet<Pos> {
    let mut out = BTreeSet::new();
    for store in stores {
        crate::semantics::explore(s, store, fuel, |cfg| {
            let mut heads = Vec::new();
            crate::semantics::head_positions(&cfg.stmt, &mut heads);
            out.extend(heads);
        });
    }
    out
}
