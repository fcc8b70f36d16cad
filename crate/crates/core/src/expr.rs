//! Polynomial expression parser.
//!
//! Grammar (whitespace ignored between tokens):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' exponent)?
//! exponent := integer | '(' ['-' | '+'] integer ')' | '-' integer
//! atom   := integer | 'h' | variable | '(' expr ')'
//! ```
//!
//! Variables are `x1..xn` plus optional per-algebra aliases. Division is only
//! accepted by constants, which keeps every result a polynomial.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::coeff::{Poly, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    NegativeExponent,
    NonConstantDivisor,
    DivisionByZero,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownVariable(v) => write!(f, "unknown variable '{v}'"),
            ParseErrorKind::NegativeExponent => f.write_str("negative exponent"),
            ParseErrorKind::NonConstantDivisor => f.write_str("division by a non-constant"),
            ParseErrorKind::DivisionByZero => f.write_str("division by zero"),
        }
    }
}

/// Parsed syntax tree, before evaluation into a [`Poly`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(BigInt),
    H,
    /// 0-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Divisor offset kept for the diagnostic.
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, u32),
}

/// Variable naming for one polynomial ring.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarNames {
    pub nvars: usize,
    pub aliases: Vec<String>,
}

impl VarNames {
    pub fn plain(nvars: usize) -> Self {
        VarNames { nvars, aliases: Vec::new() }
    }

    pub fn with_aliases(nvars: usize, aliases: Vec<String>) -> Self {
        VarNames { nvars, aliases }
    }

    fn lookup(&self, ident: &str) -> Option<usize> {
        if let Some(i) = self.aliases.iter().position(|a| a == ident) {
            return Some(i);
        }
        let digits = ident.strip_prefix('x')?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return None;
        }
        let i: usize = digits.parse().ok()?;
        (1..=self.nvars).contains(&i).then(|| i - 1)
    }

    /// Printing names: aliases when present, `x1..xn` otherwise.
    pub fn display_names(&self) -> Vec<String> {
        if self.aliases.len() == self.nvars {
            self.aliases.clone()
        } else {
            (1..=self.nvars).map(|i| format!("x{i}")).collect()
        }
    }

    pub fn format(&self, p: &Poly) -> String {
        p.format_with(&self.display_names())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a VarNames,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { offset, kind })
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

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(b) if b == c => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => self.err(self.pos, ParseErrorKind::Syntax(format!("expected '{}', found '{}'", c as char, b as char))),
            None => self.err(self.pos, ParseErrorKind::Syntax(format!("expected '{}', found end of input", c as char))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = {
                        self.skip_ws();
                        self.pos
                    };
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), at);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let start = {
            self.skip_ws();
            self.pos
        };
        let (negative, value) = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let neg = self.sign();
                let v = self.integer()?;
                self.expect(b')')?;
                (neg, v)
            }
            _ => {
                let neg = self.sign();
                (neg, self.integer()?)
            }
        };
        if negative && !value.is_zero() {
            return self.err(start, ParseErrorKind::NegativeExponent);
        }
        match value.to_u32() {
            Some(e) => Ok(Expr::Pow(Box::new(base), e)),
            None => self.err(start, ParseErrorKind::Syntax("exponent too large".into())),
        }
    }

    fn sign(&mut self) -> bool {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, ParseErrorKind::Syntax("expected integer".into()));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() => Ok(Expr::Int(self.integer()?)),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if let Some(i) = self.names.lookup(ident) {
                    Ok(Expr::Var(i))
                } else if ident == "h" {
                    Ok(Expr::H)
                } else {
                    self.err(start, ParseErrorKind::UnknownVariable(ident.to_string()))
                }
            }
            Some(b) => self.err(self.pos, ParseErrorKind::Syntax(format!("unexpected '{}'", b as char))),
            None => self.err(self.pos, ParseErrorKind::Syntax("unexpected end of input".into())),
        }
    }
}

/// Parse text into a syntax tree.
pub fn parse_tree(src: &str, names: &VarNames) -> Result<Expr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, names };
    let e = p.expr()?;
    if let Some(b) = p.peek() {
        return p.err(p.pos, ParseErrorKind::Syntax(format!("unexpected '{}'", b as char)));
    }
    Ok(e)
}

/// Evaluate a syntax tree into a polynomial over `names.nvars` variables.
pub fn eval_tree(e: &Expr, nvars: usize) -> Result<Poly, ParseError> {
    Ok(match e {
        Expr::Int(n) => Poly::from_rational(nvars, Rational::from_integer(n.clone())),
        Expr::H => Poly::h(nvars),
        Expr::Var(i) => Poly::var(nvars, *i),
        Expr::Neg(a) => -eval_tree(a, nvars)?,
        Expr::Add(a, b) => eval_tree(a, nvars)? + eval_tree(b, nvars)?,
        Expr::Sub(a, b) => eval_tree(a, nvars)? - eval_tree(b, nvars)?,
        Expr::Mul(a, b) => eval_tree(a, nvars)? * eval_tree(b, nvars)?,
        Expr::Div(a, b, at) => {
            let num = eval_tree(a, nvars)?;
            let den = eval_tree(b, nvars)?;
            if den.is_zero() {
                return Err(ParseError { offset: *at, kind: ParseErrorKind::DivisionByZero });
            }
            num.div_constant(&den)
                .map_err(|_| ParseError { offset: *at, kind: ParseErrorKind::NonConstantDivisor })?
        }
        Expr::Pow(a, k) => eval_tree(a, nvars)?.pow(*k),
    })
}

/// Parse text directly into a polynomial.
pub fn parse_expr(src: &str, names: &VarNames) -> Result<Poly, ParseError> {
    eval_tree(&parse_tree(src, names)?, names.nvars)
}
