use std::fmt;

use crate::error::{Error, Pos, Result};
use crate::lang::{Expr, Stmt};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Entry,
    Exit,
    Skip,
    Assign { target: String, rhs: Expr },
    /// Condition of an `if` or `while`.
    Guard { cond: Expr },
    DeclEnter { name: String, init: Expr },
    /// End of a declaration's scope; restores the outer binding saved by
    /// `enter`.
    DeclExit { name: String, enter: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Next,
    True,
    False,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub pos: Pos,
}

impl Node {
    /// Expressions evaluated at this node.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            NodeKind::Assign { rhs, .. } => vec![rhs],
            NodeKind::Guard { cond } => vec![cond],
            NodeKind::DeclEnter { init, .. } => vec![init],
            _ => vec![],
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            NodeKind::Entry => "entry".into(),
            NodeKind::Exit => "exit".into(),
            NodeKind::Skip => "skip".into(),
            NodeKind::Assign { target, rhs } => format!("{target} := {rhs}"),
            NodeKind::Guard { cond } => format!("guard {cond}"),
            NodeKind::DeclEnter { name, init } => format!("var {name} := {init}"),
            NodeKind::DeclExit { name, .. } => format!("end {name}"),
        }
    }
}

/// Statement-level control-flow graph of a single program. Node 0 is the
/// entry and node 1 the exit.
#[derive(Debug, Clone)]
pub struct Cfg {
    nodes: Vec<Node>,
    succs: Vec<Vec<(NodeId, EdgeKind)>>,
    preds: Vec<Vec<NodeId>>,
}

impl Cfg {
    pub const ENTRY: NodeId = 0;
    pub const EXIT: NodeId = 1;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate()
    }

    pub fn succs(&self, n: NodeId) -> &[(NodeId, EdgeKind)] {
        &self.succs[n]
    }

    pub fn preds(&self, n: NodeId) -> &[NodeId] {
        &self.preds[n]
    }

    /// Nodes at `pos`, in creation order.
    pub fn at(&self, pos: Pos) -> Vec<NodeId> {
        self.nodes()
            .filter(|(_, n)| n.pos == pos)
            .map(|(id, _)| id)
            .collect()
    }

    /// The exit paired with a declaration entry, or vice versa.
    pub fn partner(&self, n: NodeId) -> Option<NodeId> {
        match &self.nodes[n].kind {
            NodeKind::DeclExit { enter, .. } => Some(*enter),
            NodeKind::DeclEnter { .. } => self.nodes().find_map(|(id, node)| match node.kind {
                NodeKind::DeclExit { enter, .. } if enter == n => Some(id),
                _ => None,
            }),
            _ => None,
        }
    }

    fn add(&mut self, kind: NodeKind, pos: Pos) -> NodeId {
        self.nodes.push(Node { kind, pos });
        self.succs.push(Vec::new());
        self.preds.push(Vec::new());
        self.nodes.len() - 1
    }

    fn link(&mut self, from: &[(NodeId, EdgeKind)], to: NodeId) {
        for &(f, kind) in from {
            self.succs[f].push((to, kind));
            self.preds[to].push(f);
        }
    }

    fn build(&mut self, s: &Stmt, from: Vec<(NodeId, EdgeKind)>) -> Result<Vec<(NodeId, EdgeKind)>> {
        let single = |cfg: &mut Cfg, kind, pos, from: &[(NodeId, EdgeKind)]| {
            let n = cfg.add(kind, pos);
            cfg.link(from, n);
            n
        };
        Ok(match s {
            Stmt::Skip(pos) => vec![(single(self, NodeKind::Skip, *pos, &from), EdgeKind::Next)],
            Stmt::Assign { target, rhs, pos } => {
                let kind = NodeKind::Assign {
                    target: target.clone(),
                    rhs: rhs.clone(),
                };
                vec![(single(self, kind, *pos, &from), EdgeKind::Next)]
            }
            Stmt::Seq(a, b) => {
                let mid = self.build(a, from)?;
                self.build(b, mid)?
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                pos,
            } => {
                let g = single(self, NodeKind::Guard { cond: cond.clone() }, *pos, &from);
                let mut out = self.build(then_branch, vec![(g, EdgeKind::True)])?;
                out.extend(self.build(else_branch, vec![(g, EdgeKind::False)])?);
                out
            }
            Stmt::While { cond, body, pos } => {
                let g = single(self, NodeKind::Guard { cond: cond.clone() }, *pos, &from);
                let back = self.build(body, vec![(g, EdgeKind::True)])?;
                self.link(&back, g);
                vec![(g, EdgeKind::False)]
            }
            Stmt::VarDecl {
                name,
                init,
                body,
                pos,
            } => {
                let kind = NodeKind::DeclEnter {
                    name: name.clone(),
                    init: init.clone(),
                };
                let enter = single(self, kind, *pos, &from);
                let out = self.build(body, vec![(enter, EdgeKind::Next)])?;
                let kind = NodeKind::DeclExit {
                    name: name.clone(),
                    enter,
                };
                vec![(single(self, kind, *pos, &out), EdgeKind::Next)]
            }
            Stmt::IfDef { pos, .. } | Stmt::IfDefDecl { pos, .. } => {
                return Err(Error::malformed(format!(
                    "`#if` at {pos}: analyses run on single programs; project or reconfigure first"
                )))
            }
        })
    }
}

/// Builds the control-flow graph of a single program.
pub fn build_cfg(s: &Stmt) -> Result<Cfg> {
    let mut cfg = Cfg {
        nodes: Vec::new(),
        succs: Vec::new(),
        preds: Vec::new(),
    };
    let entry = cfg.add(NodeKind::Entry, Pos::SYNTHETIC);
    let exit = cfg.add(NodeKind::Exit, Pos::SYNTHETIC);
    let out = cfg.build(s, vec![(entry, EdgeKind::Next)])?;
    cfg.link(&out, exit);
    Ok(cfg)
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, node) in self.nodes() {
            write!(f, "{id} @ {} {} ->", node.pos, node.label())?;
            for (to, kind) in &self.succs[id] {
                match kind {
                    EdgeKind::Next => write!(f, " {to}")?,
                    EdgeKind::True => write!(f, " {to}(t)")?,
                    EdgeKind::False => write!(f, " {to}(f)")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_family_stmt, parse_single};

    fn cfg(text: &str) -> Cfg {
        build_cfg(&parse_single(text).unwrap()).unwrap()
    }

    fn reachable(c: &Cfg) -> usize {
        let mut seen = vec![false; c.len()];
        let mut stack = vec![Cfg::ENTRY];
        while let Some(n) = stack.pop() {
            if !std::mem::replace(&mut seen[n], true) {
                stack.extend(c.succs(n).iter().map(|(m, _)| *m));
            }
        }
        seen.iter().filter(|s| **s).count()
    }

    #[test]
    fn skip_is_a_chain() {
        let c = cfg("skip");
        assert_eq!(c.len(), 3);
        assert_eq!(c.succs(Cfg::ENTRY), &[(2, EdgeKind::Next)]);
        assert_eq!(c.succs(2), &[(Cfg::EXIT, EdgeKind::Next)]);
    }

    #[test]
    fn conditional_is_a_diamond() {
        let c = cfg("if x then y := 1 else y := 2");
        let g = 2;
        assert_eq!(c.succs(g), &[(3, EdgeKind::True), (4, EdgeKind::False)]);
        assert_eq!(c.preds(Cfg::EXIT), &[3, 4]);
    }

    #[test]
    fn loop_has_a_back_edge() {
        let c = cfg("while x < 3 do x := x + 1");
        assert_eq!(c.succs(2), &[(3, EdgeKind::True), (Cfg::EXIT, EdgeKind::False)]);
        assert_eq!(c.succs(3), &[(2, EdgeKind::Next)]);
    }

    #[test]
    fn every_node_is_reachable() {
        let c = cfg("var x := 0 or 1 in { while x < 3 do { if x then skip else x := 2 }; y := x }");
        assert_eq!(reachable(&c), c.len());
        let enter = c.nodes().find(|(_, n)| matches!(n.kind, NodeKind::DeclEnter { .. })).unwrap().0;
        let exit = c.partner(enter).unwrap();
        assert_eq!(c.partner(exit), Some(enter));
    }

    #[test]
    fn families_are_rejected() {
        let s = parse_family_stmt("#if (A) x := 1 #endif").unwrap();
        assert!(build_cfg(&s).is_err());
    }
}
