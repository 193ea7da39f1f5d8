//! Variability rewriting for `#if`-annotated imperative program families.
//!
//! A family is a program in a small imperative language whose statements
//! and local declarations may be guarded by compile-time presence
//! conditions. [`rewriter::rewrite_preserve`] turns such a family into one
//! program that picks its features nondeterministically at run time, and
//! [`rewriter::check_outcome_preservation`] confirms by enumeration that the
//! rewritten program has exactly the outcomes of all variants together.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod featexp;
pub mod lang;
pub mod rewriter;
pub mod semantics;

pub use error::{Error, Pos, Result};
