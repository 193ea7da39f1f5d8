use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::lang::{BinOp, Expr};

use super::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "variable", rename_all = "kebab-case")]
pub enum ErrorKind {
    DivByZero,
    UnboundVariable(String),
    /// Result outside the signed 64-bit range.
    Overflow,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::DivByZero => f.write_str("div-by-zero"),
            ErrorKind::UnboundVariable(x) => write!(f, "unbound-variable {x}"),
            ErrorKind::Overflow => f.write_str("overflow"),
        }
    }
}

/// One element of an expression's value set: a number or an in-band error.
pub type EvalResult = Result<i64, ErrorKind>;

pub fn apply(op: BinOp, a: i64, b: i64) -> EvalResult {
    let truth = |c: bool| Ok(c as i64);
    match op {
        BinOp::Add => a.checked_add(b).ok_or(ErrorKind::Overflow),
        BinOp::Sub => a.checked_sub(b).ok_or(ErrorKind::Overflow),
        BinOp::Mul => a.checked_mul(b).ok_or(ErrorKind::Overflow),
        BinOp::Div if b == 0 => Err(ErrorKind::DivByZero),
        BinOp::Div => a.checked_div(b).ok_or(ErrorKind::Overflow),
        BinOp::Eq => truth(a == b),
        BinOp::Ne => truth(a != b),
        BinOp::Lt => truth(a < b),
        BinOp::Le => truth(a <= b),
        BinOp::And => truth(a != 0 && b != 0),
        BinOp::Or => truth(a != 0 || b != 0),
    }
}

fn combine(op: BinOp, l: &EvalResult, r: &EvalResult) -> EvalResult {
    match (l, r) {
        (Err(e), _) | (Ok(_), Err(e)) => Err(e.clone()),
        (Ok(a), Ok(b)) => apply(op, *a, *b),
    }
}

/// The set of values `e` may take in `store`. Both operands of every binary
/// operator are evaluated (no short-circuiting).
pub fn eval_expr(e: &Expr, store: &Store) -> BTreeSet<EvalResult> {
    match e {
        Expr::Int(n) => BTreeSet::from([Ok(*n)]),
        Expr::Var(x) => BTreeSet::from([store
            .get(x)
            .ok_or_else(|| ErrorKind::UnboundVariable(x.clone()))]),
        Expr::Choice(l, r) => {
            let mut out = eval_expr(l, store);
            out.extend(eval_expr(r, store));
            out
        }
        Expr::Bin(op, l, r) => {
            let (ls, rs) = (eval_expr(l, store), eval_expr(r, store));
            ls.iter()
                .flat_map(|a| rs.iter().map(move |b| combine(*op, a, b)))
                .collect()
        }
    }
}

/// Every resolution of the choices in `e`, left operand first, paired with
/// the branch taken at each `or` (false = left) in evaluation order.
pub fn eval_paths(e: &Expr, store: &Store) -> Vec<(EvalResult, Vec<bool>)> {
    match e {
        Expr::Int(_) | Expr::Var(_) => vec![(eval_replay(e, store, &mut std::iter::empty()).unwrap(), vec![])],
        Expr::Choice(l, r) => {
            let mut out: Vec<_> = eval_paths(l, store)
                .into_iter()
                .map(|(v, mut t)| {
                    t.insert(0, false);
                    (v, t)
                })
                .collect();
            out.extend(eval_paths(r, store).into_iter().map(|(v, mut t)| {
                t.insert(0, true);
                (v, t)
            }));
            out
        }
        Expr::Bin(op, l, r) => {
            let rs = eval_paths(r, store);
            eval_paths(l, store)
                .into_iter()
                .flat_map(|(a, ta)| {
                    rs.iter().map(move |(b, tb)| {
                        let mut trace = ta.clone();
                        trace.extend_from_slice(tb);
                        (combine(*op, &a, b), trace)
                    })
                })
                .collect()
        }
    }
}

/// Evaluates deterministically, taking each `or` branch from `choices`.
/// Returns `None` if `choices` runs out.
pub fn eval_replay(
    e: &Expr,
    store: &Store,
    choices: &mut dyn Iterator<Item = bool>,
) -> Option<EvalResult> {
    Some(match e {
        Expr::Int(n) => Ok(*n),
        Expr::Var(x) => store
            .get(x)
            .ok_or_else(|| ErrorKind::UnboundVariable(x.clone())),
        Expr::Choice(l, r) => {
            if choices.next()? {
                eval_replay(r, store, choices)?
            } else {
                eval_replay(l, store, choices)?
            }
        }
        Expr::Bin(op, l, r) => {
            let a = eval_replay(l, store, choices)?;
            let b = eval_replay(r, store, choices)?;
            combine(*op, &a, &b)
        }
    })
}
