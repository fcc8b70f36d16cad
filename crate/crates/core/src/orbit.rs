//! Orbit ideals `(p_i - c_i)`, Gröbner reduction, the staircase basis B and
//! the decomposition `C[g*] = C[p] (x) span(B)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeff::{HPoly, Monomial, Poly, Rational};
use crate::lie::LieAlgebra;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("basis B not spanning: staircases of (p_i) and (p_i - c_i) differ")]
    NotSpanning,
    #[error("expected {expected} orbit constants, got {got}")]
    ConstantCount { expected: usize, got: usize },
    #[error("input depends on h")]
    HDependent,
}

/// Reduced Gröbner basis with each element written in the original generators.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    nvars: usize,
    generators: Vec<Poly>,
    basis: Vec<Poly>,
    /// `basis[k] = sum_i cofactors[k][i] * generators[i]`
    cofactors: Vec<Vec<Poly>>,
}

fn lead(p: &Poly) -> (Monomial, Rational) {
    let (m, c) = p.leading_term().expect("nonzero");
    (m.clone(), c.constant_term())
}

fn combo(nvars: usize, parts: &[(Poly, &Vec<Poly>)], len: usize) -> Vec<Poly> {
    let mut out = vec![Poly::zero(nvars); len];
    for (q, cof) in parts {
        for (o, c) in out.iter_mut().zip(cof.iter()) {
            *o += &(q * c);
        }
    }
    out
}

impl GroebnerBasis {
    /// Buchberger's algorithm with the coprime-leading-monomial skip, followed
    /// by minimization and interreduction. Generators must be h-free.
    pub fn buchberger(generators: &[Poly]) -> GroebnerBasis {
        let nvars = generators.first().map(Poly::nvars).unwrap_or(0);
        let m = generators.len();
        let mut basis: Vec<Poly> = Vec::new();
        let mut cofs: Vec<Vec<Poly>> = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            assert!(g.is_h_free(), "generators must not depend on h");
            if g.is_zero() {
                continue;
            }
            let inv = lead(g).1.recip();
            let mut cof = vec![Poly::zero(nvars); m];
            cof[i] = Poly::from_rational(nvars, inv.clone());
            basis.push(g.scale(&inv));
            cofs.push(cof);
        }
        let mut pairs: Vec<(usize, usize)> =
            (0..basis.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        while let Some((i, j)) = pairs.pop() {
            let (li, _) = lead(&basis[i]);
            let (lj, _) = lead(&basis[j]);
            if li.is_coprime(&lj) {
                continue;
            }
            let l = li.lcm(&lj);
            let (ui, uj) = (l.div(&li), l.div(&lj));
            let s = &basis[i].mul_monomial(&ui) - &basis[j].mul_monomial(&uj);
            let mut cof: Vec<Poly> = cofs[i]
                .iter()
                .zip(&cofs[j])
                .map(|(a, b)| &a.mul_monomial(&ui) - &b.mul_monomial(&uj))
                .collect();
            let (q, r) = divide(&s, &basis);
            if r.is_zero() {
                continue;
            }
            let parts: Vec<(Poly, &Vec<Poly>)> = q.into_iter().zip(cofs.iter()).collect();
            let sub = combo(nvars, &parts, m);
            for (c, s) in cof.iter_mut().zip(&sub) {
                *c -= s;
            }
            let inv = lead(&r).1.recip();
            let k = basis.len();
            basis.push(r.scale(&inv));
            cofs.push(cof.iter().map(|c| c.scale(&inv)).collect());
            pairs.extend((0..k).map(|i| (i, k)));
        }
        // minimize
        let lms: Vec<Monomial> = basis.iter().map(|b| lead(b).0).collect();
        let keep: Vec<usize> = (0..basis.len())
            .filter(|&k| {
                !(0..basis.len()).any(|o| {
                    o != k && lms[o].divides(&lms[k]) && (lms[o] != lms[k] || o < k)
                })
            })
            .collect();
        let mut basis: Vec<Poly> = keep.iter().map(|&k| basis[k].clone()).collect();
        let mut cofs: Vec<Vec<Poly>> = keep.iter().map(|&k| cofs[k].clone()).collect();
        // interreduce
        for k in 0..basis.len() {
            let others: Vec<Poly> =
                basis.iter().enumerate().filter(|(o, _)| *o != k).map(|(_, b)| b.clone()).collect();
            let other_cofs: Vec<Vec<Poly>> =
                cofs.iter().enumerate().filter(|(o, _)| *o != k).map(|(_, c)| c.clone()).collect();
            let (q, r) = divide(&basis[k], &others);
            let parts: Vec<(Poly, &Vec<Poly>)> = q.into_iter().zip(other_cofs.iter()).collect();
            let sub = combo(nvars, &parts, m);
            let inv = lead(&r).1.recip();
            cofs[k] = cofs[k].iter().zip(&sub).map(|(c, s)| (c - s).scale(&inv)).collect();
            basis[k] = r.scale(&inv);
        }
        let mut order: Vec<usize> = (0..basis.len()).collect();
        order.sort_by(|&a, &b| lead(&basis[a]).0.cmp(&lead(&basis[b]).0));
        GroebnerBasis {
            nvars,
            generators: generators.to_vec(),
            basis: order.iter().map(|&k| basis[k].clone()).collect(),
            cofactors: order.iter().map(|&k| cofs[k].clone()).collect(),
        }
    }

    pub fn basis(&self) -> &[Poly] {
        &self.basis
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn cofactors(&self) -> &[Vec<Poly>] {
        &self.cofactors
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.basis.iter().map(|b| lead(b).0).collect()
    }

    pub fn is_standard(&self, m: &Monomial) -> bool {
        !self.basis.iter().any(|b| lead(b).0.divides(m))
    }

    /// Quotients against the basis and the remainder.
    pub fn divide(&self, f: &Poly) -> (Vec<Poly>, Poly) {
        divide(f, &self.basis)
    }

    pub fn normal_form(&self, f: &Poly) -> Poly {
        self.divide(f).1
    }

    /// Every S-polynomial reduces to zero and every basis element is reduced.
    pub fn is_reduced_groebner(&self) -> bool {
        let lms = self.leading_monomials();
        for (k, b) in self.basis.iter().enumerate() {
            if !lead(b).1.is_one() {
                return false;
            }
            for (m, _) in b.terms() {
                if lms.iter().enumerate().any(|(o, l)| (o != k || m != l) && l.divides(m)) {
                    return false;
                }
            }
        }
        for j in 0..self.basis.len() {
            for i in 0..j {
                let l = lms[i].lcm(&lms[j]);
                let s = &self.basis[i].mul_monomial(&l.div(&lms[i])) - &self.basis[j].mul_monomial(&l.div(&lms[j]));
                if !self.normal_form(&s).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Cofactor identities hold and each generator reduces to zero.
    pub fn certificates_hold(&self) -> bool {
        let rebuilt = self.basis.iter().zip(&self.cofactors).all(|(b, cof)| {
            let mut s = Poly::zero(self.nvars);
            for (c, g) in cof.iter().zip(&self.generators) {
                s += &(c * g);
            }
            &s == b
        });
        rebuilt && self.generators.iter().all(|g| self.normal_form(g).is_zero())
    }

    /// `f = sum_i w_i * generators[i] + r` with `r` the normal form; worked one
    /// h-slice at a time.
    pub fn witness(&self, f: &Poly) -> (Vec<Poly>, Poly) {
        let m = self.generators.len();
        let mut w = vec![Poly::zero(self.nvars); m];
        let mut rem = Poly::zero(self.nvars);
        for (k, slice) in f.h_slices().iter().enumerate() {
            if slice.is_zero() {
                continue;
            }
            let (q, r) = self.divide(slice);
            for (qk, cof) in q.iter().zip(&self.cofactors) {
                if qk.is_zero() {
                    continue;
                }
                for (wi, ci) in w.iter_mut().zip(cof) {
                    *wi += &(qk * ci).shift_h(k);
                }
            }
            rem += &r.shift_h(k);
        }
        (w, rem)
    }
}

/// Multivariate division with full reduction. Divisors must have rational
/// leading coefficients; `f` may carry h.
pub fn divide(f: &Poly, divisors: &[Poly]) -> (Vec<Poly>, Poly) {
    let n = f.nvars();
    let leads: Vec<(Monomial, Rational)> = divisors.iter().map(lead).collect();
    let mut q = vec![Poly::zero(n); divisors.len()];
    let mut r = Poly::zero(n);
    let mut p = f.clone();
    while let Some((m, c)) = p.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
        match leads.iter().position(|(l, _)| l.divides(&m)) {
            Some(k) => {
                let u = m.div(&leads[k].0);
                let coef = c.scale(&leads[k].1.recip());
                let t = Poly::term(u, coef);
                p -= &(&t * &divisors[k]);
                q[k] += &t;
            }
            None => {
                let t = Poly::term(m, c);
                p -= &t;
                r += &t;
            }
        }
    }
    (q, r)
}

/// Staircase monomials grouped by degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitBasis {
    pub by_degree: Vec<Vec<Monomial>>,
}

impl OrbitBasis {
    pub fn all(&self) -> impl Iterator<Item = &Monomial> {
        self.by_degree.iter().flatten()
    }

    pub fn count(&self) -> usize {
        self.by_degree.iter().map(Vec::len).sum()
    }
}

/// One term `coeff * (p - c)^alpha * b` of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct KostantTerm {
    pub alpha: Vec<u32>,
    pub b: Monomial,
    pub coeff: Rational,
}

/// The ideal `(p_i - c_i)` of a regular orbit.
pub struct OrbitIdeal {
    algebra: Arc<LieAlgebra>,
    c0: Vec<Rational>,
    generators: Vec<Poly>,
    gb: GroebnerBasis,
    /// Gröbner basis of the top-degree forms of the invariants.
    graded: GroebnerBasis,
    tops: Vec<Poly>,
    spanning: bool,
    powers: RwLock<HashMap<Vec<u32>, Poly>>,
}

impl OrbitIdeal {
    pub fn new(algebra: Arc<LieAlgebra>, c0: Vec<Rational>) -> Result<OrbitIdeal, OrbitError> {
        let m = algebra.rank();
        if c0.len() != m {
            return Err(OrbitError::ConstantCount { expected: m, got: c0.len() });
        }
        let n = algebra.dim;
        let generators: Vec<Poly> = algebra
            .invariants
            .iter()
            .zip(&c0)
            .map(|(p, c)| p - &Poly::from_rational(n, c.clone()))
            .collect();
        let gb = GroebnerBasis::buchberger(&generators);
        let tops: Vec<Poly> =
            algebra.invariants.iter().map(|p| p.homogeneous_part(p.degree().unwrap_or(0))).collect();
        let graded = GroebnerBasis::buchberger(&tops);
        let a: BTreeSet<Monomial> = gb.leading_monomials().into_iter().collect();
        let b: BTreeSet<Monomial> = graded.leading_monomials().into_iter().collect();
        Ok(OrbitIdeal {
            algebra,
            c0,
            generators,
            gb,
            graded,
            tops,
            spanning: a == b,
            powers: RwLock::new(HashMap::new()),
        })
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn c0(&self) -> &[Rational] {
        &self.c0
    }

    pub fn nvars(&self) -> usize {
        self.algebra.dim
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// `p_i - c_i`
    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn groebner(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub fn normal_form(&self, f: &Poly) -> Poly {
        self.gb.normal_form(f)
    }

    /// Whether the staircase B also spans modulo the graded ideal, which the
    /// decomposition needs.
    pub fn is_spanning(&self) -> bool {
        self.spanning
    }

    pub fn is_normal(&self, f: &Poly) -> bool {
        f.terms().all(|(m, _)| self.gb.is_standard(m))
    }

    pub fn contains(&self, f: &Poly) -> bool {
        self.normal_form(f).is_zero()
    }

    pub fn ideal_witness(&self, f: &Poly) -> (Vec<Poly>, Poly) {
        self.gb.witness(f)
    }

    pub fn monomial_basis(&self, d: u32) -> OrbitBasis {
        OrbitBasis {
            by_degree: (0..=d)
                .map(|k| {
                    Monomial::all_of_degree(self.nvars(), k)
                        .into_iter()
                        .filter(|m| self.gb.is_standard(m))
                        .collect()
                })
                .collect(),
        }
    }

    /// `prod_i (p_i - c_i)^alpha_i`, cached.
    pub fn generator_power(&self, alpha: &[u32]) -> Poly {
        if let Some(p) = self.powers.read().unwrap().get(alpha) {
            return p.clone();
        }
        let mut acc = Poly::one(self.nvars());
        for (g, &a) in self.generators.iter().zip(alpha) {
            acc = &acc * &g.pow(a);
        }
        self.powers.write().unwrap().insert(alpha.to_vec(), acc.clone());
        acc
    }

    fn decompose_homogeneous(&self, f: &Poly, acc: &mut BTreeMap<(Vec<u32>, Monomial), Rational>, alpha: &mut Vec<u32>) {
        if f.is_zero() {
            return;
        }
        let d = f.degree().unwrap();
        let (w, r) = self.graded.witness(f);
        for (m, c) in r.terms() {
            let e = acc.entry((alpha.clone(), m.clone())).or_insert_with(Rational::zero);
            *e += c.constant_term();
        }
        for (i, wi) in w.iter().enumerate() {
            let di = self.tops[i].degree().unwrap();
            if d < di {
                continue;
            }
            let part = wi.homogeneous_part(d - di);
            alpha[i] += 1;
            self.decompose_homogeneous(&part, acc, alpha);
            alpha[i] -= 1;
        }
    }

    /// Unique decomposition `f = sum coeff * (p - c)^alpha * b`, `b` in B.
    ///
    /// Works from the top degree down: the top homogeneous part is split by
    /// graded division against the invariants, then the matching
    /// `(p - c)^alpha b` are subtracted, which strictly lowers the degree.
    pub fn kostant_decompose(&self, f: &Poly) -> Result<Vec<KostantTerm>, OrbitError> {
        if !self.spanning {
            return Err(OrbitError::NotSpanning);
        }
        if !f.is_h_free() {
            return Err(OrbitError::HDependent);
        }
        let m = self.rank();
        let mut acc: BTreeMap<(Vec<u32>, Monomial), Rational> = BTreeMap::new();
        let mut rest = f.clone();
        while let Some(d) = rest.degree() {
            let mut level = BTreeMap::new();
            self.decompose_homogeneous(&rest.homogeneous_part(d), &mut level, &mut vec![0; m]);
            for ((alpha, b), c) in level {
                if c.is_zero() {
                    continue;
                }
                let t = self.generator_power(&alpha).mul_monomial(&b).scale(&c);
                rest -= &t;
                *acc.entry((alpha, b)).or_insert_with(Rational::zero) += c;
            }
            if rest.degree().is_some_and(|e| e >= d) {
                return Err(OrbitError::NotSpanning);
            }
        }
        Ok(acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((alpha, b), coeff)| KostantTerm { alpha, b, coeff })
            .collect())
    }

    /// Inverse of [`OrbitIdeal::kostant_decompose`].
    pub fn kostant_expand(&self, terms: &[KostantTerm]) -> Poly {
        let mut out = Poly::zero(self.nvars());
        for t in terms {
            out += &self.generator_power(&t.alpha).mul_monomial(&t.b).scale(&t.coeff);
        }
        out
    }
}

/// Convenience: the constant polynomial `c` as an [`HPoly`] list.
pub fn constant_vector(c: &[Rational]) -> Vec<HPoly> {
    c.iter().map(|v| HPoly::constant(v.clone())).collect()
}
