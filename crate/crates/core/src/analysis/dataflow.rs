use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Pos, Result};
use crate::lang::{Expr, Stmt};

use super::cfg::{build_cfg, Cfg, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Meet {
    Union,
    Intersection,
}

/// Facts before and after every CFG node, in program order whatever the
/// analysis direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataflowResult<T: Ord> {
    pub direction: Direction,
    pub meet: Meet,
    pub before: Vec<BTreeSet<T>>,
    pub after: Vec<BTreeSet<T>>,
}

/// Transfer for one node: maps the fact on its input side to the fact on its
/// output side. It may consult the current facts of the whole result.
type Transfer<'a, T> = dyn Fn(NodeId, &BTreeSet<T>, &DataflowResult<T>) -> BTreeSet<T> + 'a;

impl<T: Ord + Clone> DataflowResult<T> {
    fn merge(&self, cfg: &Cfg, n: NodeId, boundary: &BTreeSet<T>) -> BTreeSet<T> {
        let (sources, boundary_node): (Vec<NodeId>, NodeId) = match self.direction {
            Direction::Forward => (cfg.preds(n).to_vec(), Cfg::ENTRY),
            Direction::Backward => (cfg.succs(n).iter().map(|(m, _)| *m).collect(), Cfg::EXIT),
        };
        if n == boundary_node {
            return boundary.clone();
        }
        let facts = sources.iter().map(|&m| match self.direction {
            Direction::Forward => &self.after[m],
            Direction::Backward => &self.before[m],
        });
        let mut acc: Option<BTreeSet<T>> = None;
        for f in facts {
            acc = Some(match (acc, self.meet) {
                (None, _) => f.clone(),
                (Some(a), Meet::Union) => a.union(f).cloned().collect(),
                (Some(a), Meet::Intersection) => a.intersection(f).cloned().collect(),
            });
        }
        acc.unwrap_or_default()
    }

    /// Re-applies every merge and transfer; true iff nothing changes.
    fn is_fixpoint_of(&self, cfg: &Cfg, boundary: &BTreeSet<T>, transfer: &Transfer<'_, T>) -> bool {
        (0..cfg.len()).all(|n| {
            let input = self.merge(cfg, n, boundary);
            let output = transfer(n, &input, self);
            match self.direction {
                Direction::Forward => input == self.before[n] && output == self.after[n],
                Direction::Backward => input == self.after[n] && output == self.before[n],
            }
        })
    }
}

/// Round-robin worklist solver. `top` seeds every node; `boundary` is the
/// fact at the entry (forward) or exit (backward). A declaration's entry and
/// exit are revisited together when either changes.
fn solve<T: Ord + Clone>(
    cfg: &Cfg,
    direction: Direction,
    meet: Meet,
    top: &BTreeSet<T>,
    boundary: &BTreeSet<T>,
    transfer: &Transfer<'_, T>,
) -> DataflowResult<T> {
    let mut r = DataflowResult {
        direction,
        meet,
        before: vec![top.clone(); cfg.len()],
        after: vec![top.clone(); cfg.len()],
    };
    let mut queue: VecDeque<NodeId> = match direction {
        Direction::Forward => (0..cfg.len()).collect(),
        Direction::Backward => (0..cfg.len()).rev().collect(),
    };
    let mut queued = vec![true; cfg.len()];
    while let Some(n) = queue.pop_front() {
        queued[n] = false;
        let input = r.merge(cfg, n, boundary);
        let output = transfer(n, &input, &r);
        let (inp, out) = match direction {
            Direction::Forward => (&mut r.before[n], &mut r.after[n]),
            Direction::Backward => (&mut r.after[n], &mut r.before[n]),
        };
        let input_changed = *inp != input;
        let output_changed = *out != output;
        *inp = input;
        *out = output;
        let mut wake: Vec<NodeId> = Vec::new();
        if output_changed {
            match direction {
                Direction::Forward => wake.extend(cfg.succs(n).iter().map(|(m, _)| *m)),
                Direction::Backward => wake.extend_from_slice(cfg.preds(n)),
            }
        }
        if input_changed || output_changed {
            wake.extend(cfg.partner(n));
        }
        for m in wake {
            if !queued[m] {
                queued[m] = true;
                queue.push_back(m);
            }
        }
    }
    r
}

fn uses(cfg: &Cfg, n: NodeId) -> BTreeSet<String> {
    cfg.node(n).exprs().iter().flat_map(|e| e.vars()).collect()
}

fn defined(cfg: &Cfg, n: NodeId) -> Option<&str> {
    match &cfg.node(n).kind {
        NodeKind::Assign { target, .. } => Some(target),
        NodeKind::DeclEnter { name, .. } | NodeKind::DeclExit { name, .. } => Some(name),
        _ => None,
    }
}

fn live_transfer(cfg: &Cfg) -> impl Fn(NodeId, &BTreeSet<String>, &DataflowResult<String>) -> BTreeSet<String> + '_ {
    move |n, after, r| {
        let node = cfg.node(n);
        let mut out = after.clone();
        match &node.kind {
            NodeKind::Assign { target, .. } => {
                out.remove(target);
            }
            NodeKind::DeclEnter { name, .. } => {
                out.remove(name);
                // the outer binding is restored at the scope's end
                if let Some(exit) = cfg.partner(n) {
                    if r.after[exit].contains(name) {
                        out.insert(name.clone());
                    }
                }
            }
            NodeKind::DeclExit { name, .. } => {
                out.remove(name);
            }
            _ => {}
        }
        out.extend(uses(cfg, n));
        out
    }
}

/// Backward may-analysis: variables whose current value may be read later.
pub fn live_variables(cfg: &Cfg) -> DataflowResult<String> {
    let transfer = live_transfer(cfg);
    solve(cfg, Direction::Backward, Meet::Union, &BTreeSet::new(), &BTreeSet::new(), &transfer)
}

/// Subexpressions worth tracking: operator applications over at least one
/// variable and without `or`.
fn candidate_exprs(e: &Expr, out: &mut BTreeSet<Expr>) {
    if let Expr::Bin(_, l, r) = e {
        if !e.has_choice() && !e.vars().is_empty() {
            out.insert(e.clone());
        }
        candidate_exprs(l, out);
        candidate_exprs(r, out);
    } else if let Expr::Choice(l, r) = e {
        candidate_exprs(l, out);
        candidate_exprs(r, out);
    }
}

fn avail_transfer(cfg: &Cfg) -> impl Fn(NodeId, &BTreeSet<Expr>, &DataflowResult<Expr>) -> BTreeSet<Expr> + '_ {
    move |n, before, _| {
        let mut out = before.clone();
        for e in cfg.node(n).exprs() {
            candidate_exprs(e, &mut out);
        }
        if let Some(x) = defined(cfg, n) {
            out.retain(|e| !e.mentions(x));
        }
        out
    }
}

/// Forward must-analysis: expressions computed on every path and not
/// invalidated since.
pub fn available_expressions(cfg: &Cfg) -> DataflowResult<Expr> {
    let mut universe = BTreeSet::new();
    for (_, node) in cfg.nodes() {
        for e in node.exprs() {
            candidate_exprs(e, &mut universe);
        }
    }
    let transfer = avail_transfer(cfg);
    solve(cfg, Direction::Forward, Meet::Intersection, &universe, &BTreeSet::new(), &transfer)
}

fn uninit_transfer(cfg: &Cfg) -> impl Fn(NodeId, &BTreeSet<String>, &DataflowResult<String>) -> BTreeSet<String> + '_ {
    move |n, before, r| {
        let mut out = before.clone();
        match &cfg.node(n).kind {
            NodeKind::Assign { target, .. } => {
                out.remove(target);
            }
            NodeKind::DeclEnter { name, .. } => {
                out.remove(name);
            }
            NodeKind::DeclExit { name, enter } => {
                out.remove(name);
                if r.before[*enter].contains(name) {
                    out.insert(name.clone());
                }
            }
            _ => {}
        }
        out
    }
}

/// A read of a variable that may be unbound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Warning {
    pub var: String,
    pub pos: Pos,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UNINIT {} @ {}", self.var, self.pos)
    }
}

/// Forward may-analysis of possibly-unbound variables, assuming only
/// `declared_inputs` are bound initially. One warning per read.
pub fn may_uninitialized(s: &Stmt, declared_inputs: &BTreeSet<String>) -> Result<Vec<Warning>> {
    let cfg = build_cfg(s)?;
    let result = uninitialized(&cfg, s, declared_inputs);
    let mut warnings = BTreeSet::new();
    for (n, node) in cfg.nodes() {
        for x in uses(&cfg, n) {
            if result.before[n].contains(&x) {
                warnings.insert(Warning { var: x, pos: node.pos });
            }
        }
    }
    Ok(warnings.into_iter().collect())
}

/// The underlying facts of [`may_uninitialized`].
pub fn uninitialized(cfg: &Cfg, s: &Stmt, declared_inputs: &BTreeSet<String>) -> DataflowResult<String> {
    let boundary: BTreeSet<String> = s
        .all_vars()
        .into_iter()
        .filter(|x| !declared_inputs.contains(x))
        .collect();
    let transfer = uninit_transfer(cfg);
    solve(cfg, Direction::Forward, Meet::Union, &BTreeSet::new(), &boundary, &transfer)
}

/// Checks that `r` is a fixpoint of the named analysis on `cfg`.
pub fn is_live_fixpoint(cfg: &Cfg, r: &DataflowResult<String>) -> bool {
    r.is_fixpoint_of(cfg, &BTreeSet::new(), &live_transfer(cfg))
}

pub fn is_avail_fixpoint(cfg: &Cfg, r: &DataflowResult<Expr>) -> bool {
    r.is_fixpoint_of(cfg, &BTreeSet::new(), &avail_transfer(cfg))
}

pub fn is_uninit_fixpoint(
    cfg: &Cfg,
    s: &Stmt,
    declared_inputs: &BTreeSet<String>,
    r: &DataflowResult<String>,
) -> bool {
    let boundary: BTreeSet<String> = s
        .all_vars()
        .into_iter()
        .filter(|x| !declared_inputs.contains(x))
        .collect();
    r.is_fixpoint_of(cfg, &boundary, &uninit_transfer(cfg))
}

/// Renders facts per node as `l:c label: before {..} after {..}`.
pub fn render_facts<T: Ord + fmt::Display>(cfg: &Cfg, r: &DataflowResult<T>) -> String {
    let set = |s: &BTreeSet<T>| {
        let items: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        format!("{{{}}}", items.join(", "))
    };
    let mut out = String::new();
    for (n, node) in cfg.nodes() {
        if matches!(node.kind, NodeKind::Entry | NodeKind::Exit) {
            continue;
        }
        out.push_str(&format!(
            "{} {}: before {} after {}\n",
            node.pos,
            node.label(),
            set(&r.before[n]),
            set(&r.after[n])
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_single;

    fn node_of(cfg: &Cfg, label: &str) -> NodeId {
        cfg.nodes()
            .find(|(_, n)| n.label() == label)
            .unwrap_or_else(|| panic!("no node `{label}` in\n{cfg}"))
            .0
    }

    #[test]
    fn live_between_assignments() {
        let s = parse_single("x := 1; y := x").unwrap();
        let cfg = build_cfg(&s).unwrap();
        let r = live_variables(&cfg);
        assert!(r.after[node_of(&cfg, "x := 1")].contains("x"));
        assert!(!r.after[node_of(&cfg, "y := x")].contains("x"));
        assert!(is_live_fixpoint(&cfg, &r));
    }

    #[test]
    fn outer_binding_stays_live_across_a_scope() {
        let s = parse_single("x := 1; { var x := 2 in y := x }; z := x").unwrap();
        let cfg = build_cfg(&s).unwrap();
        let r = live_variables(&cfg);
        assert!(r.after[node_of(&cfg, "x := 1")].contains("x"));
        let s = parse_single("x := 1; var x := 2 in y := x").unwrap();
        let cfg = build_cfg(&s).unwrap();
        let r = live_variables(&cfg);
        assert!(!r.after[node_of(&cfg, "x := 1")].contains("x"));
    }

    #[test]
    fn available_without_kill() {
        let s = parse_single("x := a + b; y := a + b").unwrap();
        let cfg = build_cfg(&s).unwrap();
        let r = available_expressions(&cfg);
        let ab = Expr::bin(crate::lang::BinOp::Add, Expr::var("a"), Expr::var("b"));
        assert!(r.before[node_of(&cfg, "y := a + b")].contains(&ab));
        assert!(is_avail_fixpoint(&cfg, &r));

        let s = parse_single("x := a + b; a := 1; y := a + b").unwrap();
        let cfg = build_cfg(&s).unwrap();
        let r = available_expressions(&cfg);
        assert!(!r.before[node_of(&cfg, "y := a + b")].contains(&ab));
    }

    #[test]
    fn uninitialized_reads() {
        let inputs = BTreeSet::from(["A".to_string()]);
        let s = parse_single("if A then x := 1 else skip; y := x").unwrap();
        let w = may_uninitialized(&s, &inputs).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].var, "x");
        assert!(w[0].to_string().starts_with("UNINIT x @ "));

        let none = BTreeSet::new();
        assert!(may_uninitialized(&parse_single("x := 1; y := x").unwrap(), &none).unwrap().is_empty());
        assert!(may_uninitialized(&parse_single("var x := 0 in y := x").unwrap(), &none).unwrap().is_empty());
        let w = may_uninitialized(&parse_single("{ var x := 0 in skip }; y := x").unwrap(), &none).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn uninit_result_is_a_fixpoint() {
        let s = parse_single("while i < 3 do { var t := i in i := t + 1 }; y := t").unwrap();
        let cfg = build_cfg(&s).unwrap();
        let inputs = BTreeSet::from(["i".to_string()]);
        let r = uninitialized(&cfg, &s, &inputs);
        assert!(is_uninit_fixpoint(&cfg, &s, &inputs, &r));
    }
}
