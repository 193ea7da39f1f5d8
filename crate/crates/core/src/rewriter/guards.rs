use std::collections::BTreeMap;

use crate::error::{Error, Pos, Result};
use crate::featexp::{entails, sat, FeatExp};
use crate::lang::{BinOp, Expr, Stmt};

/// Encodes a presence condition as an expression over feature variables.
pub fn encode_fexp(phi: &FeatExp) -> Expr {
    match phi {
        FeatExp::True => Expr::Int(1),
        FeatExp::Feat(a) => Expr::var(a.as_str()),
        FeatExp::Not(e) => Expr::bin(BinOp::Eq, encode_fexp(e), Expr::Int(0)),
        FeatExp::And(l, r) => Expr::bin(BinOp::And, encode_fexp(l), encode_fexp(r)),
        FeatExp::Or(l, r) => Expr::bin(BinOp::Or, encode_fexp(l), encode_fexp(r)),
    }
}

/// Turns every `#if (φ) s #endif` into `if φ ∧ κ then s else skip`. The
/// conjunct `κ` is left out when `φ` already entails it.
pub fn eliminate_ifdefs(sbar: &Stmt, kappa: &FeatExp, universe: &[String]) -> Result<Stmt> {
    match sbar {
        Stmt::IfDef { pc, body, pos } => {
            let guard = if entails(pc, kappa, universe)? {
                pc.simplify()
            } else {
                pc.clone().and(kappa.clone()).simplify()
            };
            Ok(Stmt::If {
                cond: encode_fexp(&guard),
                then_branch: Box::new(eliminate_ifdefs(body, kappa, universe)?),
                else_branch: Box::new(Stmt::Skip(*pos)),
                pos: *pos,
            })
        }
        Stmt::IfDefDecl { pos, .. } => Err(Error::Internal(format!(
            "conditional declaration at {pos} survived renaming"
        ))),
        other => other.try_map_children(|c| eliminate_ifdefs(c, kappa, universe)),
    }
}

/// Rule (5): merges adjacent `#if`s with equal bodies and mutually exclusive
/// conditions, bottom-up to a fixed point.
pub fn inline_guards(sbar: &Stmt, universe: &[String]) -> Result<Stmt> {
    Ok(inline_guards_mapped(sbar, universe)?.0)
}

/// [`inline_guards`] plus a map from the positions of every merged-away copy
/// to the corresponding positions in the surviving copy.
pub fn inline_guards_mapped(sbar: &Stmt, universe: &[String]) -> Result<(Stmt, BTreeMap<Pos, Pos>)> {
    let mut moved = BTreeMap::new();
    let out = inline(sbar, universe, &mut moved)?;
    let resolved = moved
        .keys()
        .map(|from| {
            let mut to = moved[from];
            // chains are at most as long as the map
            for _ in 0..moved.len() {
                match moved.get(&to) {
                    Some(next) if *next != to => to = *next,
                    _ => break,
                }
            }
            (*from, to)
        })
        .collect();
    Ok((out, resolved))
}

fn inline(s: &Stmt, universe: &[String], moved: &mut BTreeMap<Pos, Pos>) -> Result<Stmt> {
    let s = s.try_map_children(|c| inline(c, universe, moved))?;
    let Stmt::Seq(first, rest) = s else {
        return Ok(s);
    };
    let mut first = *first;
    let mut rest = *rest;
    loop {
        let (second, tail) = match rest {
            Stmt::Seq(a, b) => (*a, Some(*b)),
            other => (other, None),
        };
        let merged = match (&first, &second) {
            (
                Stmt::IfDef { pc: p0, body: b0, pos: q0 },
                Stmt::IfDef { pc: p1, body: b1, pos: q1 },
            ) if b0.same_shape(b1) && !sat(&p0.clone().and(p1.clone()), universe)? => {
                if q1 != q0 {
                    moved.insert(*q1, *q0);
                }
                for (from, to) in b1.positions().into_iter().zip(b0.positions()) {
                    if from != to {
                        moved.insert(from, to);
                    }
                }
                Some(Stmt::IfDef {
                    pc: p0.clone().or(p1.clone()),
                    body: b0.clone(),
                    pos: *q0,
                })
            }
            _ => None,
        };
        match (merged, tail) {
            (Some(m), Some(t)) => {
                first = m;
                rest = t;
            }
            (Some(m), None) => return Ok(m),
            (None, tail) => {
                let rest = match tail {
                    Some(t) => Stmt::seq(second, t),
                    None => second,
                };
                return Ok(Stmt::seq(first, rest));
            }
        }
    }
}
