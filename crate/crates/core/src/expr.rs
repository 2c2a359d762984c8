// SPDX-License-Identifier: Apache-2.0

//! Boolean expression AST in `~ & |` syntax.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Variable bindings used for evaluation.
pub type Assignment = BTreeMap<String, bool>;

/// Assignments above this width are not enumerated.
pub const MAX_EQUIV_VARS: usize = 16;

/// A Boolean expression. `And` and `Or` are n-ary with at least two
/// children; use [`Expr::and`] and [`Expr::or`] to keep them flat.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    Var(String),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable {0:?} is not bound")]
    UnboundVariable(String),
    #[error("{0} variables exceed the limit of {MAX_EQUIV_VARS}")]
    TooManyVariables(usize),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Conjunction of `terms`, flattening nested `And`s. An empty list is
    /// `Const(true)` and a single term is returned as is.
    pub fn and(terms: Vec<Expr>) -> Expr {
        Self::nary(terms, true)
    }

    /// Disjunction of `terms`, flattening nested `Or`s. An empty list is
    /// `Const(false)` and a single term is returned as is.
    pub fn or(terms: Vec<Expr>) -> Expr {
        Self::nary(terms, false)
    }

    fn nary(terms: Vec<Expr>, is_and: bool) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match (t, is_and) {
                (Expr::And(children), true) | (Expr::Or(children), false) => flat.extend(children),
                (t, _) => flat.push(t),
            }
        }
        match flat.len() {
            0 => Expr::Const(is_and),
            1 => flat.pop().unwrap(),
            _ if is_and => Expr::And(flat),
            _ => Expr::Or(flat),
        }
    }

    /// Variables in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit_vars(&mut |name| {
            if seen.insert(name.to_string()) {
                out.push(name.to_string());
            }
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => f(name),
            Expr::Not(e) => e.visit_vars(f),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.visit_vars(f)),
        }
    }

    /// Rebuilds the tree through [`Expr::and`] / [`Expr::or`] so every
    /// n-ary node is flat.
    pub fn flattened(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Not(e) => Expr::not(e.flattened()),
            Expr::And(es) => Expr::and(es.iter().map(Expr::flattened).collect()),
            Expr::Or(es) => Expr::or(es.iter().map(Expr::flattened).collect()),
        }
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, ExprError> {
        Ok(match self {
            Expr::Const(b) => *b,
            Expr::Var(name) => *assignment
                .get(name)
                .ok_or_else(|| ExprError::UnboundVariable(name.clone()))?,
            Expr::Not(e) => !e.evaluate(assignment)?,
            Expr::And(es) => {
                let mut acc = true;
                for e in es {
                    acc &= e.evaluate(assignment)?;
                }
                acc
            }
            Expr::Or(es) => {
                let mut acc = false;
                for e in es {
                    acc |= e.evaluate(assignment)?;
                }
                acc
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(_) => 1,
            Expr::And(_) => 2,
            Expr::Not(_) | Expr::Var(_) | Expr::Const(_) => 3,
        }
    }

    fn write_child(&self, child: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Composite children always get parentheses, so `(A & C) | B`.
        if matches!(child, Expr::And(_) | Expr::Or(_)) {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(b) => f.write_str(if *b { "1" } else { "0" }),
            Expr::Var(name) => f.write_str(name),
            Expr::Not(e) => {
                f.write_str("~")?;
                if e.precedence() < 3 {
                    write!(f, "({e})")
                } else {
                    write!(f, "{e}")
                }
            }
            Expr::And(es) | Expr::Or(es) => {
                let sep = if matches!(self, Expr::And(_)) { " & " } else { " | " };
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    self.write_child(e, f)?;
                }
                Ok(())
            }
        }
    }
}

/// Prints `e` in `~ & |` syntax; [`parse_expression`] inverts it.
pub fn print_expression(e: &Expr) -> String {
    e.to_string()
}

/// Evaluates `e` under `assignment`.
pub fn evaluate(e: &Expr, assignment: &Assignment) -> Result<bool, ExprError> {
    e.evaluate(assignment)
}

/// Parses an expression. Precedence is `~` over `&` over `|`; a leading
/// `NAME =` is skipped.
pub fn parse_expression(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_assignment_prefix();
    let e = p.parse_or()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn skip_assignment_prefix(&mut self) {
        let start = self.pos;
        if let Some(name) = self.ident() {
            if self.peek() == Some(b'=') && !name.is_empty() {
                self.pos += 1;
                return;
            }
        }
        self.pos = start;
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if !self.src.get(self.pos)?.is_ascii_alphabetic() {
            return None;
        }
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn parse_or(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.parse_and()?];
        while self.peek() == Some(b'|') {
            self.pos += 1;
            terms.push(self.parse_and()?);
        }
        Ok(Expr::or(terms))
    }

    fn parse_and(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.parse_unary()?];
        while self.peek() == Some(b'&') {
            self.pos += 1;
            terms.push(self.parse_unary()?);
        }
        Ok(Expr::and(terms))
    }

    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'~') => {
                self.pos += 1;
                Ok(Expr::not(self.parse_unary()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.parse_or()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'0') => {
                self.pos += 1;
                Ok(Expr::Const(false))
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Expr::Const(true))
            }
            Some(c) if c.is_ascii_alphabetic() => Ok(Expr::Var(self.ident().unwrap())),
            Some(_) => Err(self.error("expected a variable, constant, '~' or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Result of an equivalence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// The first assignment, in binary order over the sorted variable names,
    /// on which the two expressions differ.
    Differ(Assignment),
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

/// Enumerates `2^k` assignments over `names`, the first name being the
/// most significant bit.
pub fn assignment_for(names: &[String], bits: u32) -> Assignment {
    let k = names.len();
    names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), bits >> (k - 1 - i) & 1 == 1))
        .collect()
}

/// Brute-force equivalence over the union of both expressions' variables.
pub fn equivalent(a: &Expr, b: &Expr) -> Result<Equivalence, ExprError> {
    let names: Vec<String> = a
        .variables()
        .into_iter()
        .chain(b.variables())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if names.len() > MAX_EQUIV_VARS {
        return Err(ExprError::TooManyVariables(names.len()));
    }
    for bits in 0..1u32 << names.len() {
        let assignment = assignment_for(&names, bits);
        if a.evaluate(&assignment)? != b.evaluate(&assignment)? {
            return Ok(Equivalence::Differ(assignment));
        }
    }
    Ok(Equivalence::Equivalent)
}
