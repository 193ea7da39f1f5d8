use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A line/column pair pointing at the first character of a statement.
///
/// Nodes synthesized by the rewriter carry [`Pos::SYNTHETIC`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub const SYNTHETIC: Pos = Pos { line: 0, col: 0 };

    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }

    pub fn is_synthetic(&self) -> bool {
        *self == Pos::SYNTHETIC
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }

    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
