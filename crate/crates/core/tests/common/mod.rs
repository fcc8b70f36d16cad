#![allow(dead_code)]

//! Helpers and independent oracles shared by the integration suites.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orbitstar::algstar::QuantizationData;
use orbitstar::coeff::{HPoly, Monomial, Poly, Rational};
use orbitstar::lie::{catalog, LieAlgebra};
use orbitstar::orbit::{KostantTerm, OrbitIdeal};
use orbitstar::pbw::{EnvelopingAlgebra, PBWElement};
use orbitstar::sample::random_poly;
use orbitstar::weyl::Weyl;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn algebra(name: &str) -> Arc<LieAlgebra> {
    Arc::new(catalog(name).unwrap())
}

pub fn weyl(name: &str) -> Weyl {
    Weyl::for_algebra(algebra(name))
}

pub fn first_regular(a: &LieAlgebra) -> Vec<Rational> {
    a.regular_constants().next().unwrap().to_vec()
}

pub fn quantization(name: &str, c_h: Option<Vec<HPoly>>) -> QuantizationData {
    let a = algebra(name);
    let c0 = first_regular(&a);
    let w = Arc::new(Weyl::for_algebra(a.clone()));
    let o = Arc::new(OrbitIdeal::new(a, c0).unwrap());
    QuantizationData::new(w, o, c_h).unwrap()
}

/// Random h-free polynomial with a term count matched to the degree.
pub fn rpoly(r: &mut ChaCha8Rng, n: usize, d: u32) -> Poly {
    random_poly(r, n, d, 2 + d as usize, 3)
}

fn factorial(k: usize) -> Rational {
    (1..=k).fold(Rational::one(), |acc, i| acc * Rational::from_integer((i as i64).into()))
}

fn binom(n: usize, k: usize) -> Rational {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Symmetrization by averaging every ordering of the word, one at a time.
pub fn sym_by_permutations(ua: &EnvelopingAlgebra, m: &Monomial) -> PBWElement {
    let word = m.to_word();
    let perms = permutations(&word);
    let mut acc = PBWElement::zero();
    for p in &perms {
        acc.add_scaled(&ua.normal_order(&p).unwrap(), &HPoly::one());
    }
    acc.scale(&HPoly::constant(Rational::one() / factorial(word.len())))
}

/// Full Moyal series for the constant bracket `{q, p} = c` on polynomials in
/// `(q, p)`. Terminates because every term lowers the degree.
pub fn moyal_oracle(f: &Poly, g: &Poly, c: &Rational) -> Poly {
    assert_eq!(f.nvars(), 2);
    let top = (f.degree().unwrap_or(0) + g.degree().unwrap_or(0)) as usize;
    let mut out = Poly::zero(2);
    let half = Rational::new(1.into(), 2.into());
    for k in 0..=top {
        let mut slice = Poly::zero(2);
        for j in 0..=k {
            let df = f.partial_multi(&[(k - j) as u32, j as u32]);
            let dg = g.partial_multi(&[j as u32, (k - j) as u32]);
            if df.is_zero() || dg.is_zero() {
                continue;
            }
            let sign = if j % 2 == 0 { Rational::one() } else { -Rational::one() };
            slice += &(&df * &dg).scale(&(binom(k, j) * sign));
        }
        let mut coeff = Rational::one() / factorial(k);
        for _ in 0..k {
            coeff = coeff * &half * c;
        }
        out += &slice.scale_h(&HPoly::monomial(coeff, k));
    }
    out
}

/// Embed a polynomial in `(q, p)` into the Heisenberg coordinates.
pub fn lift_qp(f: &Poly) -> Poly {
    f.compose(&[Poly::var(3, 0), Poly::var(3, 1)]).unwrap()
}

/// Reduced row echelon solve over the rationals. Returns the unique solution
/// or `None` when the system is singular or inconsistent.
pub fn dense_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        b[r] *= &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let t = &f * &a[r][k];
                    a[i][k] -= t;
                }
                let t = &f * &b[r];
                b[i] -= t;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if b[r..].iter().any(|v| !v.is_zero()) || pivot_cols.len() < cols {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

fn exponent_vectors(m: usize, weights: &[u32], budget: u32) -> Vec<Vec<u32>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut k = 0;
    while k * weights[0] <= budget {
        for mut rest in exponent_vectors(m - 1, &weights[1..], budget - k * weights[0]) {
            rest.insert(0, k);
            out.push(rest);
        }
        k += 1;
    }
    out
}

/// Decomposition over the Kostant family found by one dense linear solve on
/// every candidate `(p - c)^alpha b` of total degree at most `deg f`.
pub fn kostant_by_dense_solve(o: &OrbitIdeal, f: &Poly) -> Option<Vec<KostantTerm>> {
    let n = o.nvars();
    let d = f.degree().unwrap_or(0);
    let gens = o.generators();
    let weights: Vec<u32> = gens.iter().map(|g| g.degree().unwrap()).collect();
    let basis: Vec<Monomial> = o.monomial_basis(d).all().cloned().collect();
    let mut cands = Vec::new();
    for alpha in exponent_vectors(gens.len(), &weights, d) {
        let used: u32 = alpha.iter().zip(&weights).map(|(a, w)| a * w).sum();
        for b in &basis {
            if used + b.degree() > d {
                continue;
            }
            let mut p = Poly::term(b.clone(), HPoly::one());
            for (g, &a) in gens.iter().zip(&alpha) {
                p = &p * &g.pow(a);
            }
            cands.push((alpha.clone(), b.clone(), p));
        }
    }
    let rows: Vec<Monomial> = Monomial::all_up_to_degree(n, d);
    let index: BTreeMap<&Monomial, usize> = rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut a = vec![vec![Rational::zero(); cands.len()]; rows.len()];
    for (j, (_, _, p)) in cands.iter().enumerate() {
        for (m, c) in p.terms() {
            a[index[m]][j] = c.constant_term();
        }
    }
    let mut b = vec![Rational::zero(); rows.len()];
    for (m, c) in f.terms() {
        b[index[m]] = c.constant_term();
    }
    let x = dense_solve(a, b)?;
    let mut terms: Vec<KostantTerm> = cands
        .into_iter()
        .zip(x)
        .filter(|(_, c)| !c.is_zero())
        .map(|((alpha, b, _), coeff)| KostantTerm { alpha, b, coeff })
        .collect();
    terms.sort();
    Some(terms)
}
