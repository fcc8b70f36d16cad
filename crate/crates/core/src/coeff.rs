//! Exact scalar and polynomial arithmetic.
//!
//! Three layers:
//! - [`Rational`]: arbitrary precision rationals, always reduced.
//! - [`HPoly`]: polynomials in the formal parameter `h` with rational coefficients.
//! - [`Poly`]: sparse polynomials in `x1..xn` whose coefficients are [`HPoly`].
//!
//! `h` is kept out of the monomials so that h-order queries never touch the
//! x-exponents. Monomials are ordered by graded reverse lexicographic order
//! with `x1 < x2 < ... < xn`, so for `x1^2 + x2^2 + x3^2` the leading monomial
//! is `x3^2`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for an integer rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCount { left: usize, right: usize },
    #[error("variable index {index} out of range 1..={nvars}")]
    VarIndex { index: usize, nvars: usize },
    #[error("division of polynomial by a non-constant or zero divisor")]
    BadDivisor,
}

// ---------------------------------------------------------------------------
// HPoly

/// Polynomial in `h` with exact rational coefficients; `coeffs[k]` multiplies `h^k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HPoly {
    coeffs: Vec<Rational>,
}

impl HPoly {
    pub fn zero() -> Self {
        HPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * h^k`
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn h() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        HPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Highest power of `h` present.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest power of `h` present.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: &Rational) -> HPoly {
        if c.is_zero() {
            return HPoly::zero();
        }
        HPoly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiply by `h^k`.
    pub fn shift(&self, k: usize) -> HPoly {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        HPoly { coeffs }
    }

    /// Drop every power of `h` strictly above `max_order`.
    pub fn truncate(&self, max_order: usize) -> HPoly {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(max_order + 1);
        HPoly::from_coeffs(coeffs)
    }

    pub fn eval(&self, h: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * h + c;
        }
        acc
    }

    /// Exact division by `h`, if the constant term vanishes.
    pub fn div_h(&self) -> Option<HPoly> {
        match self.coeffs.first() {
            None => Some(HPoly::zero()),
            Some(c) if c.is_zero() => Some(HPoly { coeffs: self.coeffs[1..].to_vec() }),
            _ => None,
        }
    }

    pub fn pow(&self, e: u32) -> HPoly {
        let mut acc = HPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl From<Rational> for HPoly {
    fn from(c: Rational) -> Self {
        HPoly::constant(c)
    }
}

impl<'a> Add<&'a HPoly> for &'a HPoly {
    type Output = HPoly;
    fn add(self, rhs: &HPoly) -> HPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        HPoly::from_coeffs(coeffs)
    }
}

impl<'a> Sub<&'a HPoly> for &'a HPoly {
    type Output = HPoly;
    fn sub(self, rhs: &HPoly) -> HPoly {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a HPoly> for &'a HPoly {
    type Output = HPoly;
    fn mul(self, rhs: &HPoly) -> HPoly {
        if self.is_zero() || rhs.is_zero() {
            return HPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        HPoly::from_coeffs(coeffs)
    }
}

impl Neg for &HPoly {
    type Output = HPoly;
    fn neg(self) -> HPoly {
        HPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl AddAssign<&HPoly> for HPoly {
    fn add_assign(&mut self, rhs: &HPoly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }
}

impl SubAssign<&HPoly> for HPoly {
    fn sub_assign(&mut self, rhs: &HPoly) {
        *self += &(-rhs);
    }
}

impl fmt::Display for HPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = Poly::constant(0, self.clone());
        write!(f, "{}", p.format_with(&[]))
    }
}

// ---------------------------------------------------------------------------
// Monomial

/// Exponent vector of a monomial in `x1..xn`.
///
/// `Ord` is graded reverse lexicographic with `x1 < ... < xn`: compare total
/// degree first, then the first variable (from `x1` upwards) whose exponents
/// differ; the smaller exponent there is the larger monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    /// `x_i` with 0-based `i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(e: Vec<u32>) -> Self {
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self / other`, assuming `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Variable indices with multiplicity, ascending: `x1^2 x3` gives `[0, 0, 2]`.
    pub fn to_word(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.degree() as usize);
        for (i, &e) in self.0.iter().enumerate() {
            w.extend(std::iter::repeat(i).take(e as usize));
        }
        w
    }

    pub fn from_word(nvars: usize, word: &[usize]) -> Monomial {
        let mut e = vec![0; nvars];
        for &i in word {
            e[i] += 1;
        }
        Monomial(e)
    }

    /// All monomials of total degree exactly `d` in `nvars` variables, ascending.
    pub fn all_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        fn rec(nvars: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if i + 1 == nvars {
                cur[i] = left;
                out.push(Monomial(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(nvars, i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        let mut out = Vec::new();
        if nvars == 0 {
            if d == 0 {
                out.push(Monomial(vec![]));
            }
            return out;
        }
        rec(nvars, 0, d, &mut vec![0; nvars], &mut out);
        out.sort();
        out
    }

    /// All monomials of total degree `<= d`, ascending.
    pub fn all_up_to_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        (0..=d).flat_map(|k| Monomial::all_of_degree(nvars, k)).collect()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(&other.0) {
            if a != b {
                return b.cmp(a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ---------------------------------------------------------------------------
// Poly

/// Sparse polynomial in `x1..xn` with [`HPoly`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, HPoly>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, HPoly::one())
    }

    pub fn constant(nvars: usize, c: HPoly) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn from_rational(nvars: usize, c: Rational) -> Self {
        Self::constant(nvars, HPoly::constant(c))
    }

    /// The coordinate `x_{i+1}` (0-based `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), HPoly::one())
    }

    /// `h` as a polynomial.
    pub fn h(nvars: usize) -> Self {
        Self::constant(nvars, HPoly::h())
    }

    pub fn term(m: Monomial, c: HPoly) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, iter: impl IntoIterator<Item = (Monomial, HPoly)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in iter {
            p.add_term(m, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &HPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> HPoly {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: &HPoly) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &HPoly)> {
        self.terms.iter().next_back()
    }

    /// Total x-degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Highest power of `h` in any coefficient.
    pub fn h_degree(&self) -> Option<usize> {
        self.terms.values().filter_map(HPoly::degree).max()
    }

    /// Lowest power of `h` present; `None` for zero.
    pub fn h_order(&self) -> Option<usize> {
        self.terms.values().filter_map(HPoly::order).min()
    }

    pub fn is_h_free(&self) -> bool {
        self.terms.values().all(HPoly::is_constant)
    }

    /// The polynomial multiplying `h^k`.
    pub fn h_slice(&self, k: usize) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let a = c.coeff(k);
                    (!a.is_zero()).then(|| (m.clone(), HPoly::constant(a)))
                })
                .collect(),
        }
    }

    /// All h-slices `[f_0, f_1, ...]` with `f = sum h^k f_k`.
    pub fn h_slices(&self) -> Vec<Poly> {
        match self.h_degree() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|k| self.h_slice(k)).collect(),
        }
    }

    pub fn from_h_slices(nvars: usize, slices: &[Poly]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (k, s) in slices.iter().enumerate() {
            out += &s.shift_h(k);
        }
        out
    }

    pub fn truncate_h(&self, max_order: usize) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let t = c.truncate(max_order);
                    (!t.is_zero()).then(|| (m.clone(), t))
                })
                .collect(),
        }
    }

    pub fn shift_h(&self, k: usize) -> Poly {
        self.map_coeffs(|c| c.shift(k))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        self.map_coeffs(|a| a.scale(c))
    }

    pub fn scale_h(&self, c: &HPoly) -> Poly {
        self.map_coeffs(|a| a * c)
    }

    fn map_coeffs(&self, f: impl Fn(&HPoly) -> HPoly) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let t = f(c);
                    (!t.is_zero()).then(|| (m.clone(), t))
                })
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    /// Homogeneous component of x-degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    fn check(&self, other: &Poly) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VarCount { left: self.nvars, right: other.nvars });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative in `x_i`, 1-based `i`.
    pub fn partial(&self, i: usize) -> Result<Poly, PolyError> {
        if i == 0 || i > self.nvars {
            return Err(PolyError::VarIndex { index: i, nvars: self.nvars });
        }
        Ok(self.partial0(i - 1))
    }

    /// Partial derivative with 0-based index; panics when out of range.
    pub fn partial0(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e == 0 {
                continue;
            }
            let mut ex = m.exponents().to_vec();
            ex[i] -= 1;
            out.add_term(Monomial(ex), &c.scale(&rat(e as i64)));
        }
        out
    }

    /// Mixed partial `d^alpha` for an exponent vector `alpha`.
    pub fn partial_multi(&self, alpha: &[u32]) -> Poly {
        let mut out = self.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                out = out.partial0(i);
                if out.is_zero() {
                    return out;
                }
            }
        }
        out
    }

    /// Substitute a rational value for `x_i` (0-based), keeping the variable count.
    pub fn substitute_value(&self, i: usize, value: &Rational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            let mut ex = m.exponents().to_vec();
            ex[i] = 0;
            let factor = num_traits::pow(value.clone(), e as usize);
            out.add_term(Monomial(ex), &c.scale(&factor));
        }
        out
    }

    /// Replace every variable `x_i` by `images[i]` (all over a common ring).
    pub fn compose(&self, images: &[Poly]) -> Result<Poly, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::VarCount { left: self.nvars, right: images.len() });
        }
        let target = images.first().map(Poly::nvars).unwrap_or(0);
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.try_mul(&images[i].pow(e))?;
                }
            }
            out = out.try_add(&t)?;
        }
        Ok(out)
    }

    /// Keep only the listed variables (0-based, in the given order); the
    /// dropped variables must not occur.
    pub fn restrict_vars(&self, keep: &[usize]) -> Result<Poly, PolyError> {
        let mut out = Poly::zero(keep.len());
        for (m, c) in &self.terms {
            for i in 0..self.nvars {
                if !keep.contains(&i) && m.exp(i) > 0 {
                    return Err(PolyError::VarIndex { index: i + 1, nvars: self.nvars });
                }
            }
            let ex = keep.iter().map(|&i| m.exp(i)).collect();
            out.add_term(Monomial(ex), c);
        }
        Ok(out)
    }

    /// Evaluate all x-variables at rational values; returns an [`HPoly`].
    pub fn eval(&self, point: &[Rational]) -> HPoly {
        let mut acc = HPoly::zero();
        for (m, c) in &self.terms {
            let mut v = Rational::one();
            for (i, &e) in m.exponents().iter().enumerate() {
                v *= num_traits::pow(point[i].clone(), e as usize);
            }
            acc += &c.scale(&v);
        }
        acc
    }

    /// Divide by a nonzero rational constant polynomial.
    pub fn div_constant(&self, d: &Poly) -> Result<Poly, PolyError> {
        if d.len() != 1 {
            return Err(PolyError::BadDivisor);
        }
        let (m, c) = d.leading_term().unwrap();
        if !m.is_one() || !c.is_constant() {
            return Err(PolyError::BadDivisor);
        }
        Ok(self.scale(&c.constant_term().recip()))
    }

    /// Canonical text: terms by descending monomial, then ascending h-power.
    /// `names` gives variable names; an empty slice means `x1..xn`.
    pub fn format_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            for (k, a) in c.coeffs().iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let negative = a.is_negative();
                let mag = a.abs();
                if out.is_empty() {
                    if negative {
                        out.push('-');
                    }
                } else {
                    out.push_str(if negative { " - " } else { " + " });
                }
                let mut parts: Vec<String> = Vec::new();
                if !mag.is_one() || (k == 0 && m.is_one()) {
                    parts.push(mag.to_string());
                }
                match k {
                    0 => {}
                    1 => parts.push("h".into()),
                    _ => parts.push(format!("h^{k}")),
                }
                for (i, &e) in m.exponents().iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let name = names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
                    if e == 1 {
                        parts.push(name);
                    } else {
                        parts.push(format!("{name}^{e}"));
                    }
                }
                out.push_str(&parts.join("*"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with(&[]))
    }
}

// Operator impls panic on variable-count mismatch; use the `try_*` methods
// where the inputs are not known to agree.

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("poly add")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).expect("poly sub")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("poly mul")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.map_coeffs(|c| -c)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "poly add_assign");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c);
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "poly sub_assign");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), &-c);
        }
    }
}
