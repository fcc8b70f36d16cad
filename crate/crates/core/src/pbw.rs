//! The h-scaled enveloping algebra U_h in the ordered PBW basis.
//!
//! The defining relation is `X_a X_j = X_j X_a + h sum_k c_aj^k X_k`. Words are
//! kept nondecreasing; right multiplication of a sorted word by one generator
//! is memoized, and every product is built from that single primitive.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::coeff::{HPoly, Monomial, Poly, Rational};
use crate::lie::LieAlgebra;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PbwError {
    #[error("generator index {index} out of range 1..={dim}")]
    Index { index: usize, dim: usize },
}

/// Sequence of 0-based generator indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    /// Sorted word of a commutative monomial.
    pub fn from_monomial(m: &Monomial) -> Self {
        Word(m.to_word().into_iter().map(|i| i as u8).collect())
    }

    pub fn to_monomial(&self, nvars: usize) -> Monomial {
        let w: Vec<usize> = self.0.iter().map(|&i| i as usize).collect();
        Monomial::from_word(nvars, &w)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Element of U_h: nondecreasing words with h-polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PBWElement {
    terms: BTreeMap<Word, HPoly>,
}

impl PBWElement {
    pub fn zero() -> Self {
        PBWElement::default()
    }

    pub fn unit() -> Self {
        Self::word(Word::unit(), HPoly::one())
    }

    /// Single sorted word with a coefficient.
    pub fn word(w: Word, c: HPoly) -> Self {
        debug_assert!(w.is_sorted());
        let mut e = PBWElement::zero();
        e.add_term(w, &c);
        e
    }

    pub fn generator(i: usize) -> Self {
        Self::word(Word(vec![i as u8]), HPoly::one())
    }

    pub fn constant(c: HPoly) -> Self {
        Self::word(Word::unit(), c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Word, &HPoly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> HPoly {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, w: Word, c: &HPoly) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &PBWElement, c: &HPoly) {
        if c.is_zero() {
            return;
        }
        for (w, a) in &other.terms {
            self.add_term(w.clone(), &(a * c));
        }
    }

    pub fn scale(&self, c: &HPoly) -> PBWElement {
        let mut out = PBWElement::zero();
        out.add_scaled(self, c);
        out
    }

    /// Filtration degree (longest word); `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).max()
    }

    /// Terms of exactly the given word length.
    pub fn part_of_degree(&self, d: usize) -> PBWElement {
        PBWElement {
            terms: self.terms.iter().filter(|(w, _)| w.len() == d).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    /// Words read as commutative monomials.
    pub fn symbol(&self, nvars: usize) -> Poly {
        Poly::from_terms(nvars, self.terms.iter().map(|(w, c)| (w.to_monomial(nvars), c.clone())))
    }

    pub fn format_with(&self, nvars: usize) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (w, c) in self.terms.iter() {
            let word = if w.is_empty() {
                "1".to_string()
            } else {
                w.0.iter().map(|i| format!("X{}", i + 1)).collect::<Vec<_>>().join("*")
            };
            let coeff = Poly::constant(nvars, c.clone()).to_string();
            parts.push(if c.is_one() { word } else { format!("({coeff})*{word}") });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl std::ops::Add<&PBWElement> for &PBWElement {
    type Output = PBWElement;
    fn add(self, rhs: &PBWElement) -> PBWElement {
        let mut out = self.clone();
        out.add_scaled(rhs, &HPoly::one());
        out
    }
}

impl std::ops::Sub<&PBWElement> for &PBWElement {
    type Output = PBWElement;
    fn sub(self, rhs: &PBWElement) -> PBWElement {
        let mut out = self.clone();
        out.add_scaled(rhs, &-&HPoly::one());
        out
    }
}

impl fmt::Display for PBWElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with(0))
    }
}

/// U_h for one Lie algebra, with a shared rewrite memo.
pub struct EnvelopingAlgebra {
    algebra: Arc<LieAlgebra>,
    memo: RwLock<HashMap<(Word, u8), PBWElement>>,
    steps: AtomicU64,
}

impl EnvelopingAlgebra {
    pub fn new(algebra: Arc<LieAlgebra>) -> Self {
        EnvelopingAlgebra { algebra, memo: RwLock::new(HashMap::new()), steps: AtomicU64::new(0) }
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim
    }

    /// Number of rewrite steps performed so far (memo misses only).
    pub fn rewrite_steps(&self) -> u64 {
        self.steps.load(AtomicOrdering::Relaxed)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    /// Normal form of `w * X_j` for a sorted word `w`.
    fn word_times_gen(&self, w: &Word, j: u8) -> PBWElement {
        let a = match w.0.last() {
            None => return PBWElement::generator(j as usize),
            Some(&a) => a,
        };
        if a <= j {
            let mut v = w.0.clone();
            v.push(j);
            return PBWElement::word(Word(v), HPoly::one());
        }
        let key = (w.clone(), j);
        if let Some(hit) = self.memo.read().unwrap().get(&key) {
            return hit.clone();
        }
        self.steps.fetch_add(1, AtomicOrdering::Relaxed);
        // (s' X_a) X_j = (s' X_j) X_a + h sum_k c_aj^k s' X_k
        let prefix = Word(w.0[..w.0.len() - 1].to_vec());
        let mut out = self.elem_times_gen(&self.word_times_gen(&prefix, j), a);
        for (k, c) in self.algebra.bracket(a as usize, j as usize) {
            let hc = HPoly::monomial(c.clone(), 1);
            out.add_scaled(&self.word_times_gen(&prefix, *k as u8), &hc);
        }
        self.memo.write().unwrap().insert(key, out.clone());
        out
    }

    fn elem_times_gen(&self, u: &PBWElement, j: u8) -> PBWElement {
        let mut out = PBWElement::zero();
        for (w, c) in u.terms() {
            out.add_scaled(&self.word_times_gen(w, j), c);
        }
        out
    }

    fn check_word(&self, w: &[usize]) -> Result<(), PbwError> {
        for &i in w {
            if i >= self.dim() {
                return Err(PbwError::Index { index: i + 1, dim: self.dim() });
            }
        }
        Ok(())
    }

    /// Expand the product `X_{w_1} ... X_{w_k}` (0-based indices) in the PBW basis.
    pub fn normal_order(&self, w: &[usize]) -> Result<PBWElement, PbwError> {
        self.check_word(w)?;
        let mut acc = PBWElement::unit();
        for &j in w {
            acc = self.elem_times_gen(&acc, j as u8);
        }
        Ok(acc)
    }

    pub fn mul(&self, a: &PBWElement, b: &PBWElement) -> PBWElement {
        let mut out = PBWElement::zero();
        for (wb, cb) in b.terms() {
            let mut prod = a.clone();
            for &j in &wb.0 {
                prod = self.elem_times_gen(&prod, j);
            }
            out.add_scaled(&prod, cb);
        }
        out
    }

    pub fn commutator(&self, a: &PBWElement, b: &PBWElement) -> PBWElement {
        &self.mul(a, b) - &self.mul(b, a)
    }

    /// True iff `u` commutes with every generator.
    pub fn center_check(&self, u: &PBWElement) -> bool {
        (0..self.dim()).all(|i| self.commutator(u, &PBWElement::generator(i)).is_zero())
    }

    pub fn pow(&self, u: &PBWElement, e: u32) -> PBWElement {
        let mut acc = PBWElement::unit();
        for _ in 0..e {
            acc = self.mul(&acc, u);
        }
        acc
    }
}

/// Helper: the element `sum c * word` built from ordered (unsorted allowed) words.
pub fn from_words(
    ua: &EnvelopingAlgebra,
    words: &[(Vec<usize>, Rational)],
) -> Result<PBWElement, PbwError> {
    let mut out = PBWElement::zero();
    for (w, c) in words {
        out.add_scaled(&ua.normal_order(w)?, &HPoly::constant(c.clone()));
    }
    Ok(out)
}
