//! Recursive-descent parser for family files, single IMPor programs and
//! standalone feature expressions.

use std::collections::BTreeSet;
use std::ops::Not;

use crate::error::{Error, Pos, Result};
use crate::featexp::FeatExp;

use super::ast::{BinOp, ConfigSpec, Expr, FamilyProgram, Stmt};

/// Identifiers containing this marker are reserved for generated names.
pub const RESERVED_MARKER: &str = "__";

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Assign,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bang,
    Op(BinOp),
    HashIf,
    HashIfdef,
    HashElse,
    HashEndif,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Assign => "`:=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::HashIf => "`#if`".into(),
            Tok::HashIfdef => "`#ifdef`".into(),
            Tok::HashElse => "`#else`".into(),
            Tok::HashEndif => "`#endif`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "skip", "if", "then", "else", "while", "do", "var", "in", "or", "true", "features", "configs",
    "all", "formula", "program",
];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += (i - start) as u32;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += (i - start) as u32;
            out.push((Tok::Int(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c == '#' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_alphabetic() {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            let tok = match word.as_str() {
                "if" => Tok::HashIf,
                "ifdef" => Tok::HashIfdef,
                "else" => Tok::HashElse,
                "endif" => Tok::HashEndif,
                _ => return Err(Error::syntax(pos, format!("unknown directive `#{word}`"))),
            };
            col += (j - i) as u32;
            i = j;
            out.push((tok, pos));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match two.as_str() {
            ":=" => (Tok::Assign, 2),
            "==" => (Tok::Op(BinOp::Eq), 2),
            "!=" => (Tok::Op(BinOp::Ne), 2),
            "<=" => (Tok::Op(BinOp::Le), 2),
            "&&" => (Tok::Op(BinOp::And), 2),
            "||" => (Tok::Op(BinOp::Or), 2),
            _ => match c {
                ';' => (Tok::Semi, 1),
                ',' => (Tok::Comma, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '!' => (Tok::Bang, 1),
                '+' => (Tok::Op(BinOp::Add), 1),
                '-' => (Tok::Op(BinOp::Sub), 1),
                '*' => (Tok::Op(BinOp::Mul), 1),
                '/' => (Tok::Op(BinOp::Div), 1),
                '<' => (Tok::Op(BinOp::Lt), 1),
                _ => return Err(Error::syntax(pos, format!("unexpected character `{c}`"))),
            },
        };
        advance(len, &mut i, &mut col);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos::new(line, col)));
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Family,
    Single,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    mode: Mode,
}

impl Parser {
    fn new(text: &str, mode: Mode) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            mode,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.at + ahead).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        Err(Error::syntax(
            self.pos(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Pos> {
        if self.is_kw(kw) {
            Ok(self.bump().1)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                if self.mode == Mode::Family && name.contains(RESERVED_MARKER) {
                    return Err(Error::syntax(
                        self.pos(),
                        format!("identifier `{name}` uses the reserved `{RESERVED_MARKER}` marker"),
                    ));
                }
                self.bump();
                Ok(name)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn int_literal(&mut self) -> Result<i64> {
        let pos = self.pos();
        let negative = if *self.peek() == Tok::Op(BinOp::Sub) {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(digits) => {
                self.bump();
                let text = if negative { format!("-{digits}") } else { digits };
                text.parse::<i64>()
                    .map_err(|_| Error::syntax(pos, format!("integer `{text}` is out of range")))
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    // ---- feature expressions ----

    fn fexp(&mut self) -> Result<FeatExp> {
        let mut lhs = self.fexp_and()?;
        while *self.peek() == Tok::Op(BinOp::Or) {
            self.bump();
            lhs = lhs.or(self.fexp_and()?);
        }
        Ok(lhs)
    }

    fn fexp_and(&mut self) -> Result<FeatExp> {
        let mut lhs = self.fexp_unary()?;
        while *self.peek() == Tok::Op(BinOp::And) {
            self.bump();
            lhs = lhs.and(self.fexp_unary()?);
        }
        Ok(lhs)
    }

    fn fexp_unary(&mut self) -> Result<FeatExp> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(self.fexp_unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let e = self.fexp()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ if self.is_kw("true") => {
                self.bump();
                Ok(FeatExp::True)
            }
            _ => Ok(FeatExp::Feat(self.ident()?)),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.binary(2)?;
        while self.is_kw("or") {
            if self.mode == Mode::Family {
                return Err(Error::syntax(
                    self.pos(),
                    "`or` is not allowed in a program family",
                ));
            }
            self.bump();
            lhs = Expr::choice(lhs, self.binary(2)?);
        }
        Ok(lhs)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr> {
        if min_prec > 6 {
            return self.primary();
        }
        let mut lhs = self.binary(min_prec + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Op(op) if op.precedence() == min_prec => *op,
                _ => break,
            };
            self.bump();
            let rhs = self.binary(min_prec + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(Expr::Int(self.int_literal()?)),
            Tok::Op(BinOp::Sub) if matches!(self.peek_at(1), Tok::Int(_)) => {
                Ok(Expr::Int(self.int_literal()?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            _ => self.unexpected("an expression"),
        }
    }

    // ---- statements ----

    fn ends_sequence(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Eof | Tok::RBrace | Tok::HashElse | Tok::HashEndif
        ) || self.is_kw("else")
    }

    /// `stmt (";" stmt)*`, nested to the right.
    fn seq(&mut self) -> Result<Stmt> {
        let first = self.stmt()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            if self.ends_sequence() {
                return Ok(first);
            }
            let rest = self.seq()?;
            return Ok(Stmt::seq(first, rest));
        }
        Ok(first)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let s = self.seq()?;
                self.expect(Tok::RBrace)?;
                Ok(s)
            }
            Tok::HashIf | Tok::HashIfdef if self.mode == Mode::Single => Err(Error::syntax(
                pos,
                "`#if` is not allowed in a single program",
            )),
            Tok::HashIf => self.hash_if(pos),
            Tok::HashIfdef => self.hash_ifdef(pos),
            Tok::Ident(kw) => match kw.as_str() {
                "skip" => {
                    self.bump();
                    Ok(Stmt::Skip(pos))
                }
                "if" => {
                    self.bump();
                    let cond = self.expr()?;
                    self.expect_kw("then")?;
                    let then_branch = self.seq()?;
                    self.expect_kw("else")?;
                    let else_branch = self.seq()?;
                    Ok(Stmt::If {
                        cond,
                        then_branch: Box::new(then_branch),
                        else_branch: Box::new(else_branch),
                        pos,
                    })
                }
                "while" => {
                    self.bump();
                    let cond = self.expr()?;
                    self.expect_kw("do")?;
                    let body = self.seq()?;
                    Ok(Stmt::While {
                        cond,
                        body: Box::new(body),
                        pos,
                    })
                }
                "var" => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect(Tok::Assign)?;
                    let init = self.expr()?;
                    self.expect_kw("in")?;
                    let body = self.seq()?;
                    Ok(Stmt::VarDecl {
                        name,
                        init,
                        body: Box::new(body),
                        pos,
                    })
                }
                _ => {
                    let target = self.ident()?;
                    self.expect(Tok::Assign)?;
                    let rhs = self.expr()?;
                    Ok(Stmt::Assign { target, rhs, pos })
                }
            },
            _ => self.unexpected("a statement"),
        }
    }

    fn presence_condition(&mut self) -> Result<FeatExp> {
        self.expect(Tok::LParen)?;
        let pc = self.fexp()?;
        self.expect(Tok::RParen)?;
        Ok(pc)
    }

    /// `#if (pc) stmt #endif` or `#if (pc) var x := n in #endif stmt`.
    fn hash_if(&mut self, pos: Pos) -> Result<Stmt> {
        self.bump();
        let pc = self.presence_condition()?;
        if self.is_kw("var") {
            let var_pos = self.pos();
            self.bump();
            let name = self.ident()?;
            self.expect(Tok::Assign)?;
            let init_pos = self.pos();
            let init = self.expr()?;
            self.expect_kw("in")?;
            if *self.peek() == Tok::HashEndif {
                self.bump();
                let Expr::Int(n) = init else {
                    return Err(Error::syntax(
                        init_pos,
                        "a conditional declaration must be initialized with an integer literal",
                    ));
                };
                let scope = self.seq()?;
                return Ok(Stmt::IfDefDecl {
                    pc,
                    name,
                    init: n,
                    scope: Box::new(scope),
                    pos,
                });
            }
            let body = self.seq()?;
            self.expect(Tok::HashEndif)?;
            let decl = Stmt::VarDecl {
                name,
                init,
                body: Box::new(body),
                pos: var_pos,
            };
            return Ok(Stmt::IfDef {
                pc,
                body: Box::new(decl),
                pos,
            });
        }
        let body = self.seq()?;
        self.expect(Tok::HashEndif)?;
        Ok(Stmt::IfDef {
            pc,
            body: Box::new(body),
            pos,
        })
    }

    /// `#ifdef (pc) s0 #else s1 #endif`, desugared to two `#if`s.
    fn hash_ifdef(&mut self, pos: Pos) -> Result<Stmt> {
        self.bump();
        let pc = self.presence_condition()?;
        let then_part = self.seq()?;
        let else_pos = self.expect(Tok::HashElse)?;
        let else_part = self.seq()?;
        self.expect(Tok::HashEndif)?;
        Ok(Stmt::seq(
            Stmt::IfDef {
                pc: pc.clone(),
                body: Box::new(then_part),
                pos,
            },
            Stmt::IfDef {
                pc: pc.not(),
                body: Box::new(else_part),
                pos: else_pos,
            },
        ))
    }

    fn finish(&mut self) -> Result<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn family(&mut self) -> Result<FamilyProgram> {
        self.expect_kw("features")?;
        let mut universe = Vec::new();
        if *self.peek() != Tok::Semi {
            universe.push(self.ident()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                universe.push(self.ident()?);
            }
        }
        self.expect(Tok::Semi)?;

        self.expect_kw("configs")?;
        let config_spec = if self.is_kw("all") {
            self.bump();
            ConfigSpec::All
        } else if self.is_kw("formula") {
            self.bump();
            ConfigSpec::Formula(self.fexp()?)
        } else {
            let mut entries = vec![self.fexp()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                entries.push(self.fexp()?);
            }
            ConfigSpec::List(entries)
        };
        self.expect(Tok::Semi)?;

        self.expect_kw("program")?;
        let body = self.seq()?;
        self.finish()?;
        Ok(FamilyProgram {
            universe,
            config_spec,
            body,
        })
    }
}

fn validate_family(p: &FamilyProgram) -> Result<()> {
    let mut seen = BTreeSet::new();
    for f in &p.universe {
        if !seen.insert(f.as_str()) {
            return Err(Error::malformed(format!("feature `{f}` declared twice")));
        }
    }
    let check_pc = |pc: &FeatExp| -> Result<()> {
        for f in pc.features() {
            if !seen.contains(f) {
                return Err(Error::malformed(format!("undeclared feature `{f}`")));
            }
        }
        Ok(())
    };
    for pc in p.body.presence_conditions() {
        check_pc(pc)?;
    }
    match &p.config_spec {
        ConfigSpec::All => {}
        ConfigSpec::Formula(k) => check_pc(k)?,
        ConfigSpec::List(ks) => ks.iter().try_for_each(check_pc)?,
    }
    if let Some(clash) = p.body.all_vars().iter().find(|v| seen.contains(v.as_str())) {
        return Err(Error::malformed(format!(
            "`{clash}` is used both as a feature and as a variable"
        )));
    }
    if !p.body.is_choice_free() {
        return Err(Error::malformed("`or` is not allowed in a program family"));
    }
    p.config_space()?;
    Ok(())
}

/// Parses a family file (`features ...; configs ...; program ...`).
pub fn parse_family(text: &str) -> Result<FamilyProgram> {
    let p = Parser::new(text, Mode::Family)?.family()?;
    validate_family(&p)?;
    Ok(p)
}

/// Parses a single IMPor statement; `or` is allowed, `#if` is not.
pub fn parse_single(text: &str) -> Result<Stmt> {
    let mut parser = Parser::new(text, Mode::Single)?;
    let s = parser.seq()?;
    parser.finish()?;
    Ok(s)
}

/// Parses a statement of the family language without header or
/// feature-declaration checks.
pub fn parse_family_stmt(text: &str) -> Result<Stmt> {
    let mut parser = Parser::new(text, Mode::Family)?;
    let s = parser.seq()?;
    parser.finish()?;
    Ok(s)
}

pub fn parse_fexp(text: &str) -> Result<FeatExp> {
    let mut parser = Parser::new(text, Mode::Family)?;
    let e = parser.fexp()?;
    parser.finish()?;
    Ok(e)
}

/// True when `text` looks like a family file rather than a single program.
pub fn is_family_text(text: &str) -> bool {
    matches!(lex(text).ok().as_deref(), Some([(Tok::Ident(kw), _), ..]) if kw == "features")
}
