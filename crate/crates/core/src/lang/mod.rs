//! Abstract syntax, parser and pretty-printer for single programs (with the
//! `or` choice operator) and for `#if`-annotated program families.

mod ast;
mod parser;
mod pretty;

pub use ast::{alpha_equivalent, BinOp, ConfigSpec, Expr, FamilyProgram, Stmt};
pub use parser::{
    is_family_text, parse_family, parse_family_stmt, parse_fexp, parse_single, RESERVED_MARKER,
};
pub use pretty::{expr_to_string, family_to_string, stmt_to_string};
