//! Canonical text for expressions, statements and family files. The output
//! re-parses to a structurally equal tree.

use super::ast::{ConfigSpec, Expr, FamilyProgram, Stmt};

const INDENT: &str = "  ";

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Choice(..) => 1,
        Expr::Bin(op, ..) => op.precedence(),
        Expr::Int(_) | Expr::Var(_) => 7,
    }
}

fn write_operand(e: &Expr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(n) => out.push_str(&n.to_string()),
        Expr::Var(x) => out.push_str(x),
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            write_operand(l, expr_prec(l) < p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_operand(r, expr_prec(r) <= p, out);
        }
        Expr::Choice(l, r) => {
            write_operand(l, false, out);
            out.push_str(" or ");
            write_operand(r, expr_prec(r) <= 1, out);
        }
    }
}

pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(s, 0, &mut out);
    out
}

fn newline(depth: usize, out: &mut String) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

/// Forms whose trailing statement would swallow a following `; s`.
fn open_ended(s: &Stmt) -> bool {
    matches!(
        s,
        Stmt::Seq(..) | Stmt::If { .. } | Stmt::While { .. } | Stmt::VarDecl { .. } | Stmt::IfDefDecl { .. }
    )
}

/// Writes a branch or loop body on its own indented line, braced when it is
/// a sequence.
fn write_nested(s: &Stmt, depth: usize, out: &mut String) {
    if matches!(s, Stmt::Seq(..)) {
        out.push_str(" {");
        newline(depth + 1, out);
        write_stmt(s, depth + 1, out);
        newline(depth, out);
        out.push('}');
    } else {
        newline(depth + 1, out);
        write_stmt(s, depth + 1, out);
    }
}

fn write_stmt(s: &Stmt, depth: usize, out: &mut String) {
    match s {
        Stmt::Skip(_) => out.push_str("skip"),
        Stmt::Assign { target, rhs, .. } => {
            out.push_str(target);
            out.push_str(" := ");
            write_expr(rhs, out);
        }
        Stmt::Seq(first, rest) => {
            if open_ended(first) {
                out.push('{');
                newline(depth + 1, out);
                write_stmt(first, depth + 1, out);
                newline(depth, out);
                out.push('}');
            } else {
                write_stmt(first, depth, out);
            }
            out.push(';');
            newline(depth, out);
            write_stmt(rest, depth, out);
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
            ..
        } => {
            out.push_str("if ");
            write_expr(cond, out);
            out.push_str(" then");
            write_nested(then_branch, depth, out);
            newline(depth, out);
            out.push_str("else");
            write_nested(else_branch, depth, out);
        }
        Stmt::While { cond, body, .. } => {
            out.push_str("while ");
            write_expr(cond, out);
            out.push_str(" do");
            write_nested(body, depth, out);
        }
        Stmt::VarDecl {
            name, init, body, ..
        } => {
            out.push_str("var ");
            out.push_str(name);
            out.push_str(" := ");
            write_expr(init, out);
            out.push_str(" in");
            newline(depth, out);
            write_stmt(body, depth, out);
        }
        Stmt::IfDef { pc, body, .. } => {
            out.push_str(&format!("#if ({pc})"));
            newline(depth + 1, out);
            write_stmt(body, depth + 1, out);
            newline(depth, out);
            out.push_str("#endif");
        }
        Stmt::IfDefDecl {
            pc,
            name,
            init,
            scope,
            ..
        } => {
            out.push_str(&format!("#if ({pc}) var {name} := {init} in #endif"));
            newline(depth, out);
            write_stmt(scope, depth, out);
        }
    }
}

pub fn family_to_string(p: &FamilyProgram) -> String {
    let mut out = String::from("features");
    if !p.universe.is_empty() {
        out.push(' ');
        out.push_str(&p.universe.join(", "));
    }
    out.push_str(";\nconfigs ");
    match &p.config_spec {
        ConfigSpec::All => out.push_str("all"),
        ConfigSpec::Formula(k) => out.push_str(&format!("formula {k}")),
        ConfigSpec::List(ks) => {
            let parts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
            out.push_str(&parts.join(", "));
        }
    }
    out.push_str(";\nprogram");
    newline(1, &mut out);
    write_stmt(&p.body, 1, &mut out);
    out.push('\n');
    out
}
