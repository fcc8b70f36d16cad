//! Symmetrization `Sym: C[g*][h] -> U_h`, its inverse, and the star product
//! `f *_S g = Sym^-1(Sym f Sym g)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::coeff::{ratio, HPoly, Monomial, Poly, Rational};
use crate::lie::LieAlgebra;
use crate::pbw::{EnvelopingAlgebra, PBWElement, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error("restriction needs the 3-dimensional heisenberg algebra, got '{0}'")]
    NotHeisenberg(String),
    #[error("input involves the central variable x3")]
    CentralVariable,
}

pub struct Weyl {
    ua: Arc<EnvelopingAlgebra>,
    cache: RwLock<HashMap<Monomial, PBWElement>>,
}

impl Weyl {
    pub fn new(ua: Arc<EnvelopingAlgebra>) -> Self {
        Weyl { ua, cache: RwLock::new(HashMap::new()) }
    }

    pub fn for_algebra(a: Arc<LieAlgebra>) -> Self {
        Self::new(Arc::new(EnvelopingAlgebra::new(a)))
    }

    pub fn ua(&self) -> &Arc<EnvelopingAlgebra> {
        &self.ua
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        self.ua.algebra()
    }

    pub fn nvars(&self) -> usize {
        self.ua.dim()
    }

    /// Symmetrization of one monomial.
    ///
    /// Averaging over the distinct orderings of the multiset `alpha` satisfies
    /// `Sym(x^a) = sum_i (a_i / k) Sym(x^(a - e_i)) X_i`: the last letter is `i`
    /// in a fraction `a_i / k` of the orderings, and the prefixes are again
    /// uniformly distributed.
    pub fn sym_monomial(&self, m: &Monomial) -> PBWElement {
        if let Some(hit) = self.cache.read().unwrap().get(m) {
            return hit.clone();
        }
        let k = m.degree();
        let out = if k <= 1 {
            PBWElement::word(Word::from_monomial(m), HPoly::one())
        } else {
            let mut acc = PBWElement::zero();
            for i in 0..m.nvars() {
                let ai = m.exp(i);
                if ai == 0 {
                    continue;
                }
                let prev = self.sym_monomial(&m.div(&Monomial::var(m.nvars(), i)));
                let prod = self.ua.mul(&prev, &PBWElement::generator(i));
                acc.add_scaled(&prod, &HPoly::constant(ratio(ai as i64, k as i64)));
            }
            acc
        };
        self.cache.write().unwrap().insert(m.clone(), out.clone());
        out
    }

    pub fn sym(&self, f: &Poly) -> PBWElement {
        let mut out = PBWElement::zero();
        for (m, c) in f.terms() {
            out.add_scaled(&self.sym_monomial(m), c);
        }
        out
    }

    /// Inverse of [`Weyl::sym`] by repeatedly subtracting the symmetrized top symbol.
    pub fn sym_inv(&self, u: &PBWElement) -> Poly {
        let n = self.nvars();
        let mut rest = u.clone();
        let mut out = Poly::zero(n);
        while let Some(d) = rest.degree() {
            let top = rest.part_of_degree(d).symbol(n);
            rest = &rest - &self.sym(&top);
            debug_assert!(rest.degree().map_or(true, |e| e < d));
            out += &top;
        }
        out
    }

    pub fn star_s(&self, f: &Poly, g: &Poly) -> Poly {
        self.sym_inv(&self.ua.mul(&self.sym(f), &self.sym(g)))
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }
}

/// `f *_S g` on the Heisenberg algebra restricted to the orbit `x3 = c`, as a
/// polynomial in `(x1, x2)`.
pub fn restrict_heisenberg_moyal(w: &Weyl, f: &Poly, g: &Poly, c: &Rational) -> Result<Poly, WeylError> {
    let a = w.algebra();
    if a.name != "heisenberg" || a.dim != 3 {
        return Err(WeylError::NotHeisenberg(a.name.clone()));
    }
    for p in [f, g] {
        if p.terms().any(|(m, _)| m.exp(2) > 0) {
            return Err(WeylError::CentralVariable);
        }
    }
    let prod = w.star_s(f, g).substitute_value(2, c);
    Ok(prod.restrict_vars(&[0, 1]).expect("x3 substituted"))
}
