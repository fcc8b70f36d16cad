//! Expression trees for smooth coefficient functions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::jet::{degree, Jet, MultiIndex};
use super::GlueError;

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Coord(usize),
    Add(Vec<SmoothFunc>),
    Mul(Vec<SmoothFunc>),
    Pow(SmoothFunc, u32),
    Exp(SmoothFunc),
    Recip(SmoothFunc),
    Bump(SmoothFunc),
    Deriv(SmoothFunc, MultiIndex),
}

/// Shared immutable expression; cloning is cheap.
#[derive(Clone, Debug)]
pub struct SmoothFunc(Arc<Node>);

impl SmoothFunc {
    fn wrap(n: Node) -> Self {
        SmoothFunc(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Self {
        Self::wrap(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// `x_{i+1}`
    pub fn coord(i: usize) -> Self {
        Self::wrap(Node::Coord(i))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn add(&self, other: &SmoothFunc) -> SmoothFunc {
        Self::sum([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &SmoothFunc) -> SmoothFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SmoothFunc {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> SmoothFunc {
        Self::product([Self::constant(c), self.clone()])
    }

    pub fn mul(&self, other: &SmoothFunc) -> SmoothFunc {
        Self::product([self.clone(), other.clone()])
    }

    pub fn sum(items: impl IntoIterator<Item = SmoothFunc>) -> SmoothFunc {
        let mut c = 0.0;
        let mut rest = Vec::new();
        for f in items {
            match &*f.0 {
                Node::Const(v) => c += v,
                Node::Add(v) => {
                    for g in v {
                        match g.as_const() {
                            Some(x) => c += x,
                            None => rest.push(g.clone()),
                        }
                    }
                }
                _ => rest.push(f),
            }
        }
        if c != 0.0 {
            rest.push(Self::constant(c));
        }
        match rest.len() {
            0 => Self::zero(),
            1 => rest.pop().unwrap(),
            _ => Self::wrap(Node::Add(rest)),
        }
    }

    pub fn product(items: impl IntoIterator<Item = SmoothFunc>) -> SmoothFunc {
        let mut c = 1.0;
        let mut rest = Vec::new();
        for f in items {
            match &*f.0 {
                Node::Const(v) => c *= v,
                Node::Mul(v) => {
                    for g in v {
                        match g.as_const() {
                            Some(x) => c *= x,
                            None => rest.push(g.clone()),
                        }
                    }
                }
                _ => rest.push(f),
            }
        }
        if c == 0.0 || rest.is_empty() {
            return Self::constant(c);
        }
        if c != 1.0 {
            rest.insert(0, Self::constant(c));
        }
        if rest.len() == 1 {
            return rest.pop().unwrap();
        }
        Self::wrap(Node::Mul(rest))
    }

    pub fn pow(&self, k: u32) -> SmoothFunc {
        match (k, self.as_const()) {
            (0, _) => Self::one(),
            (1, _) => self.clone(),
            (_, Some(c)) => Self::constant(c.powi(k as i32)),
            _ => Self::wrap(Node::Pow(self.clone(), k)),
        }
    }

    pub fn exp(&self) -> SmoothFunc {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => Self::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn recip(&self) -> SmoothFunc {
        match self.as_const() {
            Some(c) if c != 0.0 => Self::constant(1.0 / c),
            _ => Self::wrap(Node::Recip(self.clone())),
        }
    }

    pub fn bump(&self) -> SmoothFunc {
        match self.as_const() {
            Some(t) => Self::constant(bump_value(t)),
            None => Self::wrap(Node::Bump(self.clone())),
        }
    }

    /// `d^a self`, kept symbolic where the rule would grow the tree.
    pub fn deriv(&self, a: &[u32]) -> SmoothFunc {
        if degree(a) == 0 {
            return self.clone();
        }
        match &*self.0 {
            Node::Const(_) => Self::zero(),
            Node::Coord(i) => {
                if degree(a) == 1 && a.get(*i) == Some(&1) {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(v) => Self::sum(v.iter().map(|f| f.deriv(a))),
            Node::Mul(v) if v.len() == 2 && v[0].as_const().is_some() => v[0].mul(&v[1].deriv(a)),
            Node::Deriv(g, b) => {
                let s: MultiIndex = (0..a.len().max(b.len()))
                    .map(|i| a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0))
                    .collect();
                Self::wrap(Node::Deriv(g.clone(), s))
            }
            _ => Self::wrap(Node::Deriv(self.clone(), a.to_vec())),
        }
    }

    /// Plain evaluation; derivative nodes go through jets.
    pub fn eval(&self, x: &[f64]) -> Result<f64, GlueError> {
        Ok(match &*self.0 {
            Node::Const(c) => *c,
            Node::Coord(i) => x[*i],
            Node::Add(v) => v.iter().map(|f| f.eval(x)).sum::<Result<f64, _>>()?,
            Node::Mul(v) => v.iter().map(|f| f.eval(x)).product::<Result<f64, _>>()?,
            Node::Pow(f, k) => f.eval(x)?.powi(*k as i32),
            Node::Exp(f) => f.eval(x)?.exp(),
            Node::Recip(f) => {
                let v = f.eval(x)?;
                if v == 0.0 {
                    return Err(GlueError::Domain(format!("reciprocal of zero at {x:?}")));
                }
                1.0 / v
            }
            Node::Bump(f) => bump_value(f.eval(x)?),
            Node::Deriv(..) => Evaluator::new(x).jet(self, 0)?.value(),
        })
    }

    /// Highest derivative order hidden inside derivative nodes.
    pub fn hidden_order(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Coord(_) => 0,
            Node::Add(v) | Node::Mul(v) => v.iter().map(Self::hidden_order).max().unwrap_or(0),
            Node::Pow(f, _) | Node::Exp(f) | Node::Recip(f) | Node::Bump(f) => f.hidden_order(),
            Node::Deriv(f, a) => degree(a) + f.hidden_order(),
        }
    }
}

pub fn bump_value(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

impl fmt::Display for SmoothFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[SmoothFunc], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (k, g) in v.iter().enumerate() {
                if k > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{g}")?;
            }
            write!(f, ")")
        };
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Coord(i) => write!(f, "x{}", i + 1),
            Node::Add(v) => join(f, v, " + "),
            Node::Mul(v) => join(f, v, "*"),
            Node::Pow(g, k) => write!(f, "{g}^{k}"),
            Node::Exp(g) => write!(f, "exp({g})"),
            Node::Recip(g) => write!(f, "recip({g})"),
            Node::Bump(g) => write!(f, "bump({g})"),
            Node::Deriv(g, a) => write!(f, "d{a:?}({g})"),
        }
    }
}

/// Jets of many expressions at one point, sharing subexpressions.
pub struct Evaluator {
    base: Arc<[f64]>,
    cache: HashMap<usize, (SmoothFunc, Jet)>,
}

impl Evaluator {
    pub fn new(x: &[f64]) -> Self {
        Evaluator { base: x.to_vec().into(), cache: HashMap::new() }
    }

    pub fn base(&self) -> &Arc<[f64]> {
        &self.base
    }

    pub fn jet(&mut self, f: &SmoothFunc, order: usize) -> Result<Jet, GlueError> {
        let key = Arc::as_ptr(&f.0) as usize;
        if let Some((_, j)) = self.cache.get(&key) {
            if j.order() >= order {
                return Ok(j.truncate(order));
            }
        }
        let b = self.base.clone();
        let j = match &*f.0 {
            Node::Const(c) => Jet::constant(b, order, *c),
            Node::Coord(i) => {
                if *i >= b.len() {
                    return Err(GlueError::Usage(format!("x{} used in dimension {}", i + 1, b.len())));
                }
                Jet::coordinate(b, order, *i)
            }
            Node::Add(v) => {
                let mut acc = Jet::zero(b, order);
                for g in v {
                    acc.add_assign(&self.jet(g, order)?);
                }
                acc
            }
            Node::Mul(v) => {
                let mut acc = Jet::constant(b, order, 1.0);
                for g in v {
                    acc = acc.mul(&self.jet(g, order)?);
                }
                acc
            }
            Node::Pow(g, k) => self.jet(g, order)?.pow(*k),
            Node::Exp(g) => self.jet(g, order)?.exp(),
            Node::Recip(g) => self.jet(g, order)?.recip()?,
            Node::Bump(g) => self.jet(g, order)?.bump(),
            Node::Deriv(g, a) => self.jet(g, order + degree(a))?.differentiate(a)?,
        };
        self.cache.insert(key, (f.clone(), j.clone()));
        Ok(j)
    }
}

/// Parse `exp`, `bump`, `recip`, `x1..xn`, rationals and decimals with
/// `+ - * / ^` and parentheses. Division is by a guarded reciprocal.
pub fn parse_smooth(src: &str, nvars: usize) -> Result<SmoothFunc, GlueError> {
    let mut p = Parser { s: src.as_bytes(), pos: 0, nvars };
    let f = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected input"));
    }
    Ok(f)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> GlueError {
        GlueError::Fixture(format!("{what} at byte {} in {:?}", self.pos, String::from_utf8_lossy(self.s)))
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<SmoothFunc, GlueError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SmoothFunc, GlueError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let t = self.unary()?;
            acc = if c == b'*' { acc.mul(&t) } else { acc.mul(&t.recip()) };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<SmoothFunc, GlueError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<SmoothFunc, GlueError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.ws();
            let k = self.digits().ok_or_else(|| self.err("expected a nonnegative integer exponent"))?;
            let k: u32 = k.parse().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<SmoothFunc, GlueError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let d = self.digits().unwrap();
                d.parse::<f64>().map(SmoothFunc::constant).map_err(|_| self.err("bad number"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
                if let Some(i) = word.strip_prefix('x').and_then(|r| r.parse::<usize>().ok()) {
                    if i == 0 || i > self.nvars {
                        self.pos = start;
                        return Err(self.err(&format!("unknown variable {word}")));
                    }
                    return Ok(SmoothFunc::coord(i - 1));
                }
                let f: fn(&SmoothFunc) -> SmoothFunc = match word.as_str() {
                    "exp" => SmoothFunc::exp,
                    "bump" => SmoothFunc::bump,
                    "recip" => SmoothFunc::recip,
                    _ => {
                        self.pos = start;
                        return Err(self.err(&format!("unknown name {word}")));
                    }
                };
                if self.peek() != Some(b'(') {
                    return Err(self.err("expected '('"));
                }
                let arg = self.atom()?;
                Ok(f(&arg))
            }
            _ => Err(self.err("expected an operand")),
        }
    }
}
