use std::fmt;

use serde::Serialize;

use crate::error::Pos;
use crate::lang::{Expr, Stmt};

use super::eval::{eval_expr, eval_paths, ErrorKind, EvalResult};
use super::store::Store;

/// A runtime failure and the statement that raised it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub pos: Pos,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.kind, self.pos)
    }
}

/// An unfinished execution state ⟨s, σ⟩.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineConfig {
    pub stmt: Stmt,
    pub store: Store,
}

impl MachineConfig {
    pub fn new(stmt: Stmt, store: Store) -> Self {
        MachineConfig { stmt, store }
    }
}

/// One successor of a configuration under the small-step relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Transition {
    Next(MachineConfig),
    Done(Store),
    Fault(RuntimeError),
}

/// A transition together with the `or` branches taken to reach it.
#[derive(Debug, Clone)]
pub(crate) struct TracedTransition {
    pub transition: Transition,
    pub choices: Vec<bool>,
}

type Evaluator<'a> = &'a dyn Fn(&Expr, &Store) -> Vec<(EvalResult, Vec<bool>)>;

fn untraced(e: &Expr, store: &Store) -> Vec<(EvalResult, Vec<bool>)> {
    eval_expr(e, store).into_iter().map(|v| (v, Vec::new())).collect()
}

/// All successors of `cfg`: the rules Skip, Asgn, Sq1, Sq2, If1, If2, Wh1,
/// Wh2, Var1 and Var2, with each premise instantiated for every member of
/// the evaluated expression's value set.
///
/// # Panics
///
/// If `cfg.stmt` still contains `#if` constructs.
pub fn step(cfg: &MachineConfig) -> Vec<Transition> {
    let mut out: Vec<Transition> = successors(&cfg.stmt, &cfg.store, &untraced)
        .into_iter()
        .map(|t| t.transition)
        .collect();
    dedup_in_order(&mut out);
    out
}

/// Like [`step`], but enumerating every resolution path of the `or`
/// operators separately.
pub(crate) fn step_traced(cfg: &MachineConfig) -> Vec<TracedTransition> {
    successors(&cfg.stmt, &cfg.store, &eval_paths)
}

fn dedup_in_order(v: &mut Vec<Transition>) {
    let mut seen = std::collections::HashSet::new();
    v.retain(|t| seen.insert(t.clone()));
}

fn traced(transition: Transition, choices: Vec<bool>) -> TracedTransition {
    TracedTransition { transition, choices }
}

fn successors(stmt: &Stmt, store: &Store, eval: Evaluator<'_>) -> Vec<TracedTransition> {
    let fault = |kind: ErrorKind, pos: Pos| Transition::Fault(RuntimeError { kind, pos });
    match stmt {
        Stmt::Skip(_) => vec![traced(Transition::Done(store.clone()), vec![])],
        Stmt::Assign { target, rhs, pos } => eval(rhs, store)
            .into_iter()
            .map(|(v, choices)| {
                let t = match v {
                    Ok(n) => Transition::Done(store.clone().with(target.clone(), n)),
                    Err(kind) => fault(kind, *pos),
                };
                traced(t, choices)
            })
            .collect(),
        Stmt::Seq(first, rest) => successors(first, store, eval)
            .into_iter()
            .map(|TracedTransition { transition, choices }| {
                let t = match transition {
                    Transition::Next(c) => Transition::Next(MachineConfig::new(
                        Stmt::Seq(Box::new(c.stmt), rest.clone()),
                        c.store,
                    )),
                    Transition::Done(s) => Transition::Next(MachineConfig::new((**rest).clone(), s)),
                    f @ Transition::Fault(_) => f,
                };
                traced(t, choices)
            })
            .collect(),
        Stmt::If {
            cond,
            then_branch,
            else_branch,
            pos,
        } => eval(cond, store)
            .into_iter()
            .map(|(v, choices)| {
                let t = match v {
                    Ok(0) => Transition::Next(MachineConfig::new((**else_branch).clone(), store.clone())),
                    Ok(_) => Transition::Next(MachineConfig::new((**then_branch).clone(), store.clone())),
                    Err(kind) => fault(kind, *pos),
                };
                traced(t, choices)
            })
            .collect(),
        Stmt::While { cond, body, pos } => eval(cond, store)
            .into_iter()
            .map(|(v, choices)| {
                let t = match v {
                    Ok(0) => Transition::Done(store.clone()),
                    Ok(_) => Transition::Next(MachineConfig::new(
                        Stmt::seq((**body).clone(), stmt.clone()),
                        store.clone(),
                    )),
                    Err(kind) => fault(kind, *pos),
                };
                traced(t, choices)
            })
            .collect(),
        Stmt::VarDecl {
            name,
            init,
            body,
            pos,
        } => {
            let outer = store.get(name);
            let mut out = Vec::new();
            for (v, choices) in eval(init, store) {
                let n = match v {
                    Ok(n) => n,
                    Err(kind) => {
                        out.push(traced(fault(kind, *pos), choices));
                        continue;
                    }
                };
                let inner_store = store.clone().with(name.clone(), n);
                for inner in successors(body, &inner_store, eval) {
                    let mut trace = choices.clone();
                    trace.extend(inner.choices);
                    let t = match inner.transition {
                        // Var1: keep the local value in the residual declaration
                        Transition::Next(c) => {
                            let local = c
                                .store
                                .get(name)
                                .expect("a declared variable stays bound inside its scope");
                            let mut restored = c.store;
                            restored.restore(name, outer);
                            Transition::Next(MachineConfig::new(
                                Stmt::VarDecl {
                                    name: name.clone(),
                                    init: Expr::Int(local),
                                    body: Box::new(c.stmt),
                                    pos: *pos,
                                },
                                restored,
                            ))
                        }
                        // Var2
                        Transition::Done(mut s) => {
                            s.restore(name, outer);
                            Transition::Done(s)
                        }
                        f @ Transition::Fault(_) => f,
                    };
                    out.push(traced(t, trace));
                }
            }
            out
        }
        Stmt::IfDef { .. } | Stmt::IfDefDecl { .. } => {
            panic!("cannot execute a `#if` construct; project or rewrite the family first")
        }
    }
}

/// Positions of the statements that the next transition of `stmt` executes.
pub(crate) fn head_positions(stmt: &Stmt, out: &mut Vec<Pos>) {
    match stmt {
        Stmt::Seq(first, _) => head_positions(first, out),
        Stmt::VarDecl { body, pos, .. } => {
            out.push(*pos);
            head_positions(body, out);
        }
        other => out.push(other.pos()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_single;

    fn cfg(text: &str, store: Store) -> MachineConfig {
        MachineConfig::new(parse_single(text).unwrap(), store)
    }

    #[test]
    fn skip_terminates() {
        let s = Store::new().with("x", 1);
        assert_eq!(step(&cfg("skip", s.clone())), vec![Transition::Done(s)]);
    }

    #[test]
    fn assignment_of_choice_branches() {
        let s = Store::new();
        let out = step(&cfg("x := 0 or 1", s.clone()));
        assert_eq!(
            out,
            vec![
                Transition::Done(s.clone().with("x", 0)),
                Transition::Done(s.with("x", 1))
            ]
        );
    }

    #[test]
    fn while_false_exits() {
        let s = Store::new();
        assert_eq!(step(&cfg("while 0 do skip", s.clone())), vec![Transition::Done(s)]);
    }

    #[test]
    fn while_true_unrolls() {
        let out = step(&cfg("while 1 do skip", Store::new()));
        match &out[..] {
            [Transition::Next(c)] => assert!(matches!(c.stmt, Stmt::Seq(..))),
            _ => panic!("unexpected {out:?}"),
        }
    }

    #[test]
    fn declaration_restores_outer_value() {
        let mut c = cfg("var x := 5 in x := x + 1", Store::new().with("x", 1));
        // Var2 fires directly: the body finishes in one step
        let out = step(&c);
        assert_eq!(out, vec![Transition::Done(Store::new().with("x", 1))]);

        // Var1 keeps the local value in the residual declaration
        c = cfg("var x := 5 in x := x + 1; y := x", Store::new().with("x", 1).with("y", 0));
        let out = step(&c);
        match &out[..] {
            [Transition::Next(next)] => {
                assert_eq!(next.store.get("x"), Some(1));
                match &next.stmt {
                    Stmt::VarDecl { init, .. } => assert_eq!(*init, Expr::Int(6)),
                    other => panic!("expected a declaration, got {other:?}"),
                }
            }
            _ => panic!("unexpected {out:?}"),
        }
    }

    #[test]
    fn fault_carries_position() {
        let out = step(&cfg("y := 2 / x", Store::new().with("x", 0)));
        assert_eq!(
            out,
            vec![Transition::Fault(RuntimeError {
                kind: ErrorKind::DivByZero,
                pos: Pos::new(1, 1)
            })]
        );
    }

    #[test]
    fn conditional_with_choice_takes_both_branches() {
        let out = step(&cfg("if 0 or 1 then x := 1 else x := 2", Store::new()));
        assert_eq!(out.len(), 2);
    }
}
