use std::fmt;

use serde::Serialize;

use crate::error::{Error, Pos, Result};
use crate::featexp::FeatExp;
use crate::lang::{Expr, Stmt};

use super::env::{FreshNameSupply, RenameEnv};

/// Presence condition of the enclosing `#if`s; `true` at top level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteContext {
    pub pc: FeatExp,
}

impl RewriteContext {
    pub fn top() -> Self {
        RewriteContext { pc: FeatExp::True }
    }

    pub fn under(&self, phi: &FeatExp) -> Self {
        RewriteContext {
            pc: conj(&self.pc, phi),
        }
    }
}

impl Default for RewriteContext {
    fn default() -> Self {
        RewriteContext::top()
    }
}

fn conj(ctx: &FeatExp, phi: &FeatExp) -> FeatExp {
    if ctx.is_true() {
        phi.clone()
    } else {
        ctx.clone().and(phi.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "1")]
    Decl,
    #[serde(rename = "2.1")]
    UseUnique,
    #[serde(rename = "2.2")]
    UseSplit,
    #[serde(rename = "2.3")]
    UseUnresolved,
    #[serde(rename = "3.1")]
    DefUnique,
    #[serde(rename = "3.2")]
    DefSplit,
    #[serde(rename = "3.3")]
    DefUnresolved,
    #[serde(rename = "4")]
    Eliminate,
    #[serde(rename = "5")]
    Inline,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::Decl => "1",
            Rule::UseUnique => "2.1",
            Rule::UseSplit => "2.2",
            Rule::UseUnresolved => "2.3",
            Rule::DefUnique => "3.1",
            Rule::DefSplit => "3.2",
            Rule::DefUnresolved => "3.3",
            Rule::Eliminate => "4",
            Rule::Inline => "5",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One rule application, with the environment in effect afterwards.
#[derive(Debug, Clone, Serialize)]
pub struct RuleEvent {
    pub rule: Rule,
    pub pos: Pos,
    pub var: Option<String>,
    #[serde(serialize_with = "super::env::ser_fexp")]
    pub context: FeatExp,
    pub env: RenameEnv,
}

impl fmt::Display for RuleEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) @ {}", self.rule, self.pos)?;
        if let Some(x) = &self.var {
            write!(f, " {x}")?;
        }
        write!(f, " under {} with {}", self.context, self.env)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Access {
    Use,
    Def,
}

/// What remains after the tracked variables of a node's own expressions are
/// resolved: nothing, or its child statements under the given environment.
enum Then {
    Done,
    Children(RenameEnv),
}

/// Applies rules (1)–(3) in one pass, threading the rename environment.
pub struct Rewriter<'u> {
    universe: &'u [String],
    fresh: FreshNameSupply,
    trace: Vec<RuleEvent>,
    visits: u64,
    widest_env: usize,
}

impl<'u> Rewriter<'u> {
    pub fn new(universe: &'u [String], fresh: FreshNameSupply) -> Self {
        Rewriter {
            universe,
            fresh,
            trace: Vec::new(),
            visits: 0,
            widest_env: 0,
        }
    }

    pub fn trace(&self) -> &[RuleEvent] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<RuleEvent> {
        self.trace
    }

    /// Statement and resolution steps taken so far.
    pub fn visits(&self) -> u64 {
        self.visits
    }

    /// Largest environment seen.
    pub fn widest_env(&self) -> usize {
        self.widest_env
    }

    fn record(&mut self, rule: Rule, pos: Pos, var: Option<&str>, ctx: &FeatExp, env: &RenameEnv) {
        self.trace.push(RuleEvent {
            rule,
            pos,
            var: var.map(str::to_string),
            context: ctx.clone(),
            env: env.clone(),
        });
    }

    /// Rewrites `s` until no conditional declaration is left.
    pub fn rewrite(&mut self, s: &Stmt, ctx: &RewriteContext, env: &RenameEnv) -> Result<Stmt> {
        self.stmt(s, &ctx.pc, env)
    }

    fn stmt(&mut self, s: &Stmt, ctx: &FeatExp, env: &RenameEnv) -> Result<Stmt> {
        self.visits += 1;
        self.widest_env = self.widest_env.max(env.len());
        match s {
            Stmt::Skip(_) => Ok(s.clone()),
            Stmt::Seq(a, b) => Ok(Stmt::seq(self.stmt(a, ctx, env)?, self.stmt(b, ctx, env)?)),
            Stmt::IfDef { pc, body, pos } => Ok(Stmt::IfDef {
                pc: pc.clone(),
                body: Box::new(self.stmt(body, &conj(ctx, pc), env)?),
                pos: *pos,
            }),
            Stmt::IfDefDecl { .. } => Ok(self.decl(s, ctx, env)?.0),
            Stmt::Assign { target, rhs, .. } => {
                let mut pending = Vec::new();
                if env.tracks(target) {
                    pending.push(target.clone());
                }
                pending.extend(rhs.vars().into_iter().filter(|x| env.tracks(x) && x != target));
                self.resolve(s.clone(), &pending, ctx, env, &Then::Done)
            }
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => {
                let pending = tracked(cond, env);
                self.resolve(s.clone(), &pending, ctx, env, &Then::Children(env.clone()))
            }
            Stmt::VarDecl { name, init, .. } => {
                let pending = tracked(init, env);
                self.resolve(s.clone(), &pending, ctx, env, &Then::Children(env.without(name)))
            }
        }
    }

    fn decl(&mut self, s: &Stmt, ctx: &FeatExp, env: &RenameEnv) -> Result<(Stmt, RenameEnv)> {
        let Stmt::IfDefDecl {
            pc,
            name,
            init,
            scope,
            pos,
        } = s
        else {
            return Err(Error::Internal(format!(
                "expected a conditional declaration at {}",
                s.pos()
            )));
        };
        let fresh = self.fresh.fresh(name, pc);
        let inner = env.extended(name, pc, &fresh);
        self.record(Rule::Decl, *pos, Some(name), ctx, &inner);
        let scope = self.stmt(scope, ctx, &inner)?;
        let out = Stmt::VarDecl {
            name: fresh,
            init: Expr::Int(*init),
            body: Box::new(scope),
            pos: *pos,
        };
        Ok((out, inner))
    }

    /// Resolves each pending variable of `node`'s own expressions, splitting
    /// the node under `#if`s where the declaration it refers to varies.
    fn resolve(
        &mut self,
        node: Stmt,
        pending: &[String],
        ctx: &FeatExp,
        env: &RenameEnv,
        then: &Then,
    ) -> Result<Stmt> {
        self.visits += 1;
        let Some((x, rest)) = pending.split_first() else {
            return match then {
                Then::Done => Ok(node),
                Then::Children(inner) => node.try_map_children(|c| self.stmt(c, ctx, inner)),
            };
        };
        let access = match &node {
            Stmt::Assign { target, .. } if target == x => Access::Def,
            _ => Access::Use,
        };
        let pick = |use_rule, def_rule| match access {
            Access::Use => use_rule,
            Access::Def => def_rule,
        };
        let pos = node.pos();
        let regions = env.regions(x, ctx, self.universe)?;
        match regions.as_slice() {
            [] => {
                self.record(pick(Rule::UseUnresolved, Rule::DefUnresolved), pos, Some(x), ctx, env);
                self.resolve(node, rest, ctx, env, then)
            }
            [only] => {
                let node = match &only.target {
                    Some(to) => {
                        self.record(pick(Rule::UseUnique, Rule::DefUnique), pos, Some(x), ctx, env);
                        rename_head(&node, x, to)
                    }
                    None => {
                        self.record(pick(Rule::UseUnresolved, Rule::DefUnresolved), pos, Some(x), ctx, env);
                        node
                    }
                };
                self.resolve(node, rest, ctx, env, then)
            }
            many => {
                self.record(pick(Rule::UseSplit, Rule::DefSplit), pos, Some(x), ctx, env);
                let mut copies = Vec::with_capacity(many.len());
                for region in many {
                    let copy = match &region.target {
                        Some(to) => rename_head(&node, x, to),
                        None => node.clone(),
                    };
                    let body = self.resolve(copy, rest, &conj(ctx, &region.pc), env, then)?;
                    copies.push(Stmt::IfDef {
                        pc: region.pc.clone(),
                        body: Box::new(body),
                        pos,
                    });
                }
                Ok(Stmt::seq_all(copies))
            }
        }
    }
}

fn tracked(e: &Expr, env: &RenameEnv) -> Vec<String> {
    e.vars().into_iter().filter(|x| env.tracks(x)).collect()
}

/// Renames `from` in the node's own expressions (and assignment target),
/// leaving child statements alone.
fn rename_head(node: &Stmt, from: &str, to: &str) -> Stmt {
    match node {
        Stmt::Assign { target, rhs, pos } => Stmt::Assign {
            target: if target == from { to.to_string() } else { target.clone() },
            rhs: rhs.rename(from, to),
            pos: *pos,
        },
        Stmt::If {
            cond,
            then_branch,
            else_branch,
            pos,
        } => Stmt::If {
            cond: cond.rename(from, to),
            then_branch: then_branch.clone(),
            else_branch: else_branch.clone(),
            pos: *pos,
        },
        Stmt::While { cond, body, pos } => Stmt::While {
            cond: cond.rename(from, to),
            body: body.clone(),
            pos: *pos,
        },
        Stmt::VarDecl {
            name,
            init,
            body,
            pos,
        } => Stmt::VarDecl {
            name: name.clone(),
            init: init.rename(from, to),
            body: body.clone(),
            pos: *pos,
        },
        other => other.clone(),
    }
}

fn supply_for(s: &Stmt, env: &RenameEnv, universe: &[String]) -> FreshNameSupply {
    FreshNameSupply::avoiding(
        s.all_vars()
            .into_iter()
            .chain(env.range().into_iter().map(str::to_string))
            .chain(universe.iter().cloned()),
    )
}

/// Rule (1) on one conditional declaration: returns the renamed plain
/// declaration (its scope rewritten) and the extended environment.
pub fn rewrite_decl(
    node: &Stmt,
    ctx: &RewriteContext,
    delta: &RenameEnv,
    fresh: &mut FreshNameSupply,
    universe: &[String],
) -> Result<(Stmt, RenameEnv)> {
    let mut rw = Rewriter::new(universe, std::mem::take(fresh));
    let out = rw.decl(node, &ctx.pc, delta);
    *fresh = rw.fresh;
    out
}

/// Rules (2.1)–(2.3) on an assignment reading tracked variables.
pub fn rewrite_use(
    stmt: &Stmt,
    ctx: &RewriteContext,
    delta: &RenameEnv,
    universe: &[String],
) -> Result<Stmt> {
    rewrite_assign(stmt, ctx, delta, universe)
}

/// Rules (3.1)–(3.3) on an assignment to a tracked variable.
pub fn rewrite_def(
    stmt: &Stmt,
    ctx: &RewriteContext,
    delta: &RenameEnv,
    universe: &[String],
) -> Result<Stmt> {
    rewrite_assign(stmt, ctx, delta, universe)
}

fn rewrite_assign(
    stmt: &Stmt,
    ctx: &RewriteContext,
    delta: &RenameEnv,
    universe: &[String],
) -> Result<Stmt> {
    if !matches!(stmt, Stmt::Assign { .. }) {
        return Err(Error::malformed(format!("expected an assignment, found `{stmt}`")));
    }
    let mut rw = Rewriter::new(universe, supply_for(stmt, delta, universe));
    rw.rewrite(stmt, ctx, delta)
}

#[cfg(test)]
mod tests {
    use std::ops::Not;

    use super::*;
    use crate::lang::{parse_family_stmt, parse_single};

    fn u() -> Vec<String> {
        vec!["A".into(), "B".into()]
    }

    fn a() -> FeatExp {
        FeatExp::feat("A")
    }

    fn ctx(pc: FeatExp) -> RewriteContext {
        RewriteContext { pc }
    }

    #[test]
    fn use_with_unique_entailed_condition() {
        let d = RenameEnv::new().extended("x", &a(), "x1");
        let s = parse_single("y := x + 1").unwrap();
        let out = rewrite_use(&s, &ctx(a().and(FeatExp::feat("B"))), &d, &u()).unwrap();
        assert!(out.same_shape(&parse_single("y := x1 + 1").unwrap()));
    }

    #[test]
    fn use_outside_every_condition_is_unchanged() {
        let d = RenameEnv::new().extended("x", &a(), "x1");
        let s = parse_single("y := x").unwrap();
        let out = rewrite_use(&s, &ctx(a().not()), &d, &u()).unwrap();
        assert!(out.same_shape(&s));
        let out = rewrite_def(&parse_single("x := 7").unwrap(), &ctx(a().not()), &d, &u()).unwrap();
        assert!(out.same_shape(&parse_single("x := 7").unwrap()));
    }

    #[test]
    fn definitions_resolve_and_split() {
        let d = RenameEnv::new().extended("x", &a(), "x1");
        let out = rewrite_def(&parse_single("x := 7").unwrap(), &ctx(a()), &d, &u()).unwrap();
        assert!(out.same_shape(&parse_single("x1 := 7").unwrap()));

        let d = d.extended("x", &a().not(), "x2");
        let out = rewrite_def(&parse_single("x := 7").unwrap(), &RewriteContext::top(), &d, &u()).unwrap();
        let want = Stmt::seq(
            Stmt::ifdef(a(), parse_single("x1 := 7").unwrap()),
            Stmt::ifdef(a().not(), parse_single("x2 := 7").unwrap()),
        );
        assert!(out.same_shape(&want));
    }

    #[test]
    fn target_and_uses_resolve_together() {
        let d = RenameEnv::new()
            .extended("x", &a(), "x1")
            .extended("x", &a().not(), "x2");
        let out = rewrite_def(&parse_single("x := x + 1").unwrap(), &RewriteContext::top(), &d, &u()).unwrap();
        let want = Stmt::seq(
            Stmt::ifdef(a(), parse_single("x1 := x1 + 1").unwrap()),
            Stmt::ifdef(a().not(), parse_single("x2 := x2 + 1").unwrap()),
        );
        assert!(out.same_shape(&want));
    }

    #[test]
    fn declaration_extends_environment() {
        let s = parse_family_stmt("#if (A) var x := 2 in #endif y := x").unwrap();
        let mut fresh = FreshNameSupply::default();
        let (out, d) = rewrite_decl(&s, &RewriteContext::top(), &RenameEnv::new(), &mut fresh, &u()).unwrap();
        assert_eq!(d.len(), 1);
        let x1 = d.entries()[0].fresh.clone();
        let Stmt::VarDecl { name, body, .. } = &out else {
            panic!("expected a declaration, got {out}");
        };
        assert_eq!(name, &x1);
        // y := x splits into the declared copy and the global one
        let want = Stmt::seq(
            Stmt::ifdef(a(), Stmt::assign("y", Expr::var(x1.as_str()))),
            Stmt::ifdef(a().not(), parse_single("y := x").unwrap()),
        );
        assert!(body.same_shape(&want), "{body}");
    }

    #[test]
    fn guards_duplicate_the_whole_statement() {
        let s = parse_family_stmt("#if (A) var x := 2 in #endif while x < 3 do x := x + 1").unwrap();
        let universe = ["A".to_string()];
        let mut rw = Rewriter::new(&universe, FreshNameSupply::default());
        let out = rw.rewrite(&s, &RewriteContext::top(), &RenameEnv::new()).unwrap();
        let text = out.to_string();
        assert_eq!(text.matches("while").count(), 2, "{text}");
        assert!(rw.trace().iter().any(|e| e.rule == Rule::UseSplit));
    }

    #[test]
    fn plain_declaration_hides_tracked_variable() {
        let s = parse_family_stmt("#if (A) var x := 2 in #endif var x := x in y := x").unwrap();
        let universe = ["A".to_string()];
        let mut rw = Rewriter::new(&universe, FreshNameSupply::default());
        let out = rw.rewrite(&s, &RewriteContext::top(), &RenameEnv::new()).unwrap();
        // the initializer splits; the inner `y := x` reads the plain local
        let text = out.to_string();
        assert_eq!(text.matches("y := x").count(), 2, "{text}");
    }
}
