use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Pos, Result};
use crate::featexp::{self, ConfigSpace, FeatExp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 10] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; `or` (choice) sits below all of these at 1.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Int(i64),
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// `e0 or e1`: nondeterministically either operand.
    Choice(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn choice(l: Expr, r: Expr) -> Self {
        Expr::Choice(Box::new(l), Box::new(r))
    }

    pub fn has_choice(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Var(_) => false,
            Expr::Bin(_, l, r) => l.has_choice() || r.has_choice(),
            Expr::Choice(..) => true,
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Bin(_, l, r) | Expr::Choice(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Expr::Int(_) => false,
            Expr::Var(y) => y == x,
            Expr::Bin(_, l, r) | Expr::Choice(l, r) => l.mentions(x) || r.mentions(x),
        }
    }

    /// Replaces every occurrence of variable `from` with `to`.
    pub fn rename(&self, from: &str, to: &str) -> Expr {
        match self {
            Expr::Int(_) => self.clone(),
            Expr::Var(y) if y == from => Expr::Var(to.to_string()),
            Expr::Var(_) => self.clone(),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.rename(from, to), r.rename(from, to)),
            Expr::Choice(l, r) => Expr::choice(l.rename(from, to), r.rename(from, to)),
        }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::Int(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stmt {
    Skip(Pos),
    Assign {
        target: String,
        rhs: Expr,
        pos: Pos,
    },
    Seq(Box<Stmt>, Box<Stmt>),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Box<Stmt>,
        pos: Pos,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
        pos: Pos,
    },
    VarDecl {
        name: String,
        init: Expr,
        body: Box<Stmt>,
        pos: Pos,
    },
    /// `#if (pc) body #endif`
    IfDef {
        pc: FeatExp,
        body: Box<Stmt>,
        pos: Pos,
    },
    /// `#if (pc) var name := init in #endif scope`
    IfDefDecl {
        pc: FeatExp,
        name: String,
        init: i64,
        scope: Box<Stmt>,
        pos: Pos,
    },
}

impl Stmt {
    pub fn skip() -> Self {
        Stmt::Skip(Pos::SYNTHETIC)
    }

    pub fn assign(target: impl Into<String>, rhs: Expr) -> Self {
        Stmt::Assign {
            target: target.into(),
            rhs,
            pos: Pos::SYNTHETIC,
        }
    }

    pub fn seq(first: Stmt, second: Stmt) -> Self {
        Stmt::Seq(Box::new(first), Box::new(second))
    }

    /// Right-nested sequence of `parts`; `skip` when empty.
    pub fn seq_all(parts: impl IntoIterator<Item = Stmt>) -> Self {
        let mut parts: Vec<Stmt> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Stmt::skip();
        };
        while let Some(prev) = parts.pop() {
            acc = Stmt::seq(prev, acc);
        }
        acc
    }

    pub fn if_then_else(cond: Expr, then_branch: Stmt, else_branch: Stmt) -> Self {
        Stmt::If {
            cond,
            then_branch: Box::new(then_branch),
            else_branch: Box::new(else_branch),
            pos: Pos::SYNTHETIC,
        }
    }

    pub fn while_do(cond: Expr, body: Stmt) -> Self {
        Stmt::While {
            cond,
            body: Box::new(body),
            pos: Pos::SYNTHETIC,
        }
    }

    pub fn var_decl(name: impl Into<String>, init: Expr, body: Stmt) -> Self {
        Stmt::VarDecl {
            name: name.into(),
            init,
            body: Box::new(body),
            pos: Pos::SYNTHETIC,
        }
    }

    pub fn ifdef(pc: FeatExp, body: Stmt) -> Self {
        Stmt::IfDef {
            pc,
            body: Box::new(body),
            pos: Pos::SYNTHETIC,
        }
    }

    pub fn ifdef_decl(pc: FeatExp, name: impl Into<String>, init: i64, scope: Stmt) -> Self {
        Stmt::IfDefDecl {
            pc,
            name: name.into(),
            init,
            scope: Box::new(scope),
            pos: Pos::SYNTHETIC,
        }
    }

    /// Source position; a sequence reports its first statement's.
    pub fn pos(&self) -> Pos {
        match self {
            Stmt::Skip(pos) => *pos,
            Stmt::Seq(first, _) => first.pos(),
            Stmt::Assign { pos, .. }
            | Stmt::If { pos, .. }
            | Stmt::While { pos, .. }
            | Stmt::VarDecl { pos, .. }
            | Stmt::IfDef { pos, .. }
            | Stmt::IfDefDecl { pos, .. } => *pos,
        }
    }

    pub fn with_pos(mut self, new: Pos) -> Self {
        match &mut self {
            Stmt::Skip(pos)
            | Stmt::Assign { pos, .. }
            | Stmt::If { pos, .. }
            | Stmt::While { pos, .. }
            | Stmt::VarDecl { pos, .. }
            | Stmt::IfDef { pos, .. }
            | Stmt::IfDefDecl { pos, .. } => *pos = new,
            Stmt::Seq(..) => {}
        }
        self
    }

    /// Copy with every position reset to [`Pos::SYNTHETIC`]; two trees are
    /// structurally equal iff their stripped forms are `==`.
    pub fn strip_positions(&self) -> Stmt {
        self.map_children(Stmt::strip_positions).with_pos(Pos::SYNTHETIC)
    }

    /// Structural equality ignoring positions.
    pub fn same_shape(&self, other: &Stmt) -> bool {
        self.strip_positions() == other.strip_positions()
    }

    /// Rebuilds the node with `f` applied to each direct child statement.
    pub fn map_children(&self, mut f: impl FnMut(&Stmt) -> Stmt) -> Stmt {
        self.try_map_children(|c| Ok::<_, std::convert::Infallible>(f(c)))
            .unwrap_or_else(|never| match never {})
    }

    pub fn try_map_children<E>(
        &self,
        mut f: impl FnMut(&Stmt) -> std::result::Result<Stmt, E>,
    ) -> std::result::Result<Stmt, E> {
        Ok(match self {
            Stmt::Skip(_) | Stmt::Assign { .. } => self.clone(),
            Stmt::Seq(a, b) => Stmt::Seq(Box::new(f(a)?), Box::new(f(b)?)),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                pos,
            } => Stmt::If {
                cond: cond.clone(),
                then_branch: Box::new(f(then_branch)?),
                else_branch: Box::new(f(else_branch)?),
                pos: *pos,
            },
            Stmt::While { cond, body, pos } => Stmt::While {
                cond: cond.clone(),
                body: Box::new(f(body)?),
                pos: *pos,
            },
            Stmt::VarDecl {
                name,
                init,
                body,
                pos,
            } => Stmt::VarDecl {
                name: name.clone(),
                init: init.clone(),
                body: Box::new(f(body)?),
                pos: *pos,
            },
            Stmt::IfDef { pc, body, pos } => Stmt::IfDef {
                pc: pc.clone(),
                body: Box::new(f(body)?),
                pos: *pos,
            },
            Stmt::IfDefDecl {
                pc,
                name,
                init,
                scope,
                pos,
            } => Stmt::IfDefDecl {
                pc: pc.clone(),
                name: name.clone(),
                init: *init,
                scope: Box::new(f(scope)?),
                pos: *pos,
            },
        })
    }

    pub fn children(&self) -> Vec<&Stmt> {
        match self {
            Stmt::Skip(_) | Stmt::Assign { .. } => vec![],
            Stmt::Seq(a, b) => vec![a, b],
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => vec![then_branch, else_branch],
            Stmt::While { body, .. } | Stmt::VarDecl { body, .. } | Stmt::IfDef { body, .. } => {
                vec![body]
            }
            Stmt::IfDefDecl { scope, .. } => vec![scope],
        }
    }

    /// Expressions appearing directly in this node (not in children).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match self {
            Stmt::Assign { rhs, .. } => vec![rhs],
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => vec![cond],
            Stmt::VarDecl { init, .. } => vec![init],
            _ => vec![],
        }
    }

    fn any(&self, pred: &impl Fn(&Stmt) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    /// No `#if` constructs anywhere.
    pub fn is_plain(&self) -> bool {
        !self.any(&|s| matches!(s, Stmt::IfDef { .. } | Stmt::IfDefDecl { .. }))
    }

    pub fn is_choice_free(&self) -> bool {
        !self.any(&|s| s.own_exprs().iter().any(|e| e.has_choice()))
    }

    pub fn has_ifdef_decl(&self) -> bool {
        self.any(&|s| matches!(s, Stmt::IfDefDecl { .. }))
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Stmt::node_count)
            .sum::<usize>()
    }

    /// Variables read or written and not bound by an enclosing declaration.
    ///
    /// A conditionally declared name stays free in its scope, since the
    /// projection that drops the declaration refers to the outer variable.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Stmt::Skip(_) => {}
            Stmt::Assign { target, rhs, .. } => {
                out.insert(target.clone());
                out.extend(rhs.vars());
            }
            Stmt::VarDecl {
                name, init, body, ..
            } => {
                out.extend(init.vars());
                let mut inner = body.free_vars();
                inner.remove(name);
                out.extend(inner);
            }
            _ => {
                for e in self.own_exprs() {
                    out.extend(e.vars());
                }
                for c in self.children() {
                    c.collect_free(out);
                }
            }
        }
    }

    /// Every identifier used as a variable anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_all_vars(&mut out);
        out
    }

    fn collect_all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Stmt::Assign { target, .. } => {
                out.insert(target.clone());
            }
            Stmt::VarDecl { name, .. } | Stmt::IfDefDecl { name, .. } => {
                out.insert(name.clone());
            }
            _ => {}
        }
        for e in self.own_exprs() {
            out.extend(e.vars());
        }
        for c in self.children() {
            c.collect_all_vars(out);
        }
    }

    /// Presence conditions of every `#if` node, in preorder.
    pub fn presence_conditions(&self) -> Vec<&FeatExp> {
        let mut out = Vec::new();
        self.collect_pcs(&mut out);
        out
    }

    fn collect_pcs<'a>(&'a self, out: &mut Vec<&'a FeatExp>) {
        if let Stmt::IfDef { pc, .. } | Stmt::IfDefDecl { pc, .. } = self {
            out.push(pc);
        }
        for c in self.children() {
            c.collect_pcs(out);
        }
    }

    /// Positions of every non-sequence node, in preorder.
    pub fn positions(&self) -> Vec<Pos> {
        let mut out = Vec::new();
        self.collect_positions(&mut out);
        out
    }

    fn collect_positions(&self, out: &mut Vec<Pos>) {
        if !matches!(self, Stmt::Seq(..)) {
            out.push(self.pos());
        }
        for c in self.children() {
            c.collect_positions(out);
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::expr_to_string(self))
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::stmt_to_string(self))
    }
}

/// How a family file describes its valid configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigSpec {
    All,
    /// One formula per configuration, each with exactly one model.
    List(Vec<FeatExp>),
    Formula(FeatExp),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyProgram {
    pub universe: Vec<String>,
    pub config_spec: ConfigSpec,
    pub body: Stmt,
}

impl FamilyProgram {
    /// Resolves the configuration description to an explicit, nonempty set.
    pub fn config_space(&self) -> Result<ConfigSpace> {
        match &self.config_spec {
            ConfigSpec::All => ConfigSpace::all(self.universe.clone()),
            ConfigSpec::Formula(kappa) => featexp::valid_configs(&self.universe, kappa),
            ConfigSpec::List(entries) => {
                let mut configs = Vec::with_capacity(entries.len());
                for entry in entries {
                    let models = featexp::valid_configs(&self.universe, entry)?;
                    if models.len() != 1 {
                        return Err(Error::malformed(format!(
                            "configuration `{entry}` must fix every feature (it has {} models)",
                            models.len()
                        )));
                    }
                    configs.push(models.configs()[0].clone());
                }
                ConfigSpace::new(self.universe.clone(), configs)
            }
        }
    }

    /// Variables observable in final stores: the body's free variables.
    pub fn variables(&self) -> BTreeSet<String> {
        self.body.free_vars()
    }
}

impl fmt::Display for FamilyProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::family_to_string(self))
    }
}

/// α-equivalence: equal up to consistent renaming of declared variables
/// (both plain and conditional declarations). Positions are ignored.
pub fn alpha_equivalent(a: &Stmt, b: &Stmt) -> bool {
    fn lookup(env: &[(String, String)], x: &str, left: bool) -> Option<usize> {
        env.iter()
            .rposition(|(l, r)| if left { l == x } else { r == x })
    }
    fn expr_eq(a: &Expr, b: &Expr, env: &[(String, String)]) -> bool {
        match (a, b) {
            (Expr::Int(x), Expr::Int(y)) => x == y,
            (Expr::Var(x), Expr::Var(y)) => {
                match (lookup(env, x, true), lookup(env, y, false)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Expr::Bin(o1, l1, r1), Expr::Bin(o2, l2, r2)) => {
                o1 == o2 && expr_eq(l1, l2, env) && expr_eq(r1, r2, env)
            }
            (Expr::Choice(l1, r1), Expr::Choice(l2, r2)) => {
                expr_eq(l1, l2, env) && expr_eq(r1, r2, env)
            }
            _ => false,
        }
    }
    fn var_eq(x: &str, y: &str, env: &[(String, String)]) -> bool {
        expr_eq(&Expr::var(x), &Expr::var(y), env)
    }
    fn go(a: &Stmt, b: &Stmt, env: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (Stmt::Skip(_), Stmt::Skip(_)) => true,
            (
                Stmt::Assign {
                    target: t1, rhs: e1, ..
                },
                Stmt::Assign {
                    target: t2, rhs: e2, ..
                },
            ) => var_eq(t1, t2, env) && expr_eq(e1, e2, env),
            (Stmt::Seq(a1, b1), Stmt::Seq(a2, b2)) => go(a1, a2, env) && go(b1, b2, env),
            (
                Stmt::If {
                    cond: c1,
                    then_branch: t1,
                    else_branch: e1,
                    ..
                },
                Stmt::If {
                    cond: c2,
                    then_branch: t2,
                    else_branch: e2,
                    ..
                },
            ) => expr_eq(c1, c2, env) && go(t1, t2, env) && go(e1, e2, env),
            (
                Stmt::While {
                    cond: c1, body: b1, ..
                },
                Stmt::While {
                    cond: c2, body: b2, ..
                },
            ) => expr_eq(c1, c2, env) && go(b1, b2, env),
            (
                Stmt::VarDecl {
                    name: n1,
                    init: i1,
                    body: b1,
                    ..
                },
                Stmt::VarDecl {
                    name: n2,
                    init: i2,
                    body: b2,
                    ..
                },
            ) => {
                if !expr_eq(i1, i2, env) {
                    return false;
                }
                env.push((n1.clone(), n2.clone()));
                let ok = go(b1, b2, env);
                env.pop();
                ok
            }
            (
                Stmt::IfDef {
                    pc: p1, body: b1, ..
                },
                Stmt::IfDef {
                    pc: p2, body: b2, ..
                },
            ) => p1 == p2 && go(b1, b2, env),
            (
                Stmt::IfDefDecl {
                    pc: p1,
                    name: n1,
                    init: i1,
                    scope: s1,
                    ..
                },
                Stmt::IfDefDecl {
                    pc: p2,
                    name: n2,
                    init: i2,
                    scope: s2,
                    ..
                },
            ) => p1 == p2 && n1 == n2 && i1 == i2 && go(s1, s2, env),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}
