//! Order-by-order search for `T = Id + h T_1 + ... + h^r T_r` with
//! `T(f *_A g) = T f *_B T g mod h^(r+1)` on polynomials of degree `<= d`.
//!
//! At order `n` the unknown `T_n` must satisfy `dT_n = E_n`, where
//! `dT(f, g) = f T(g) - T(fg) + T(f) g` and `E_n` collects every term built
//! from `T_1..T_(n-1)`. A particular solution is built by recursion on
//! monomials; it is unique up to a derivation, and that derivation is fixed
//! one order later by requiring the antisymmetric part of `E_(n+1)` to vanish,
//! which is a linear condition. Every operator is computed on the space of
//! degree `<= 2d`, the largest degree a product of two inputs reaches.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;
use thiserror::Error;

use super::StarProduct;
use crate::coeff::{HPoly, Monomial, Poly, Rational};
use crate::linalg::LinearSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquivalenceConfig {
    /// Maximal degree `d` of the inputs.
    pub degree: u32,
    /// Maximal h-order `r`.
    pub order: usize,
    /// Degree of the ansatz for the images `D(x_j)` of the gauge derivations.
    pub derivation_degree: u32,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        EquivalenceConfig { degree: 3, order: 2, derivation_degree: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("not equivalent at order {order}: antisymmetric obstruction on ({f}, {g}) is {residual}")]
    NotEquivalent { order: usize, f: Poly, g: Poly, residual: Poly },
    #[error("order {order}: defect is not a coboundary on ({f}, {g}), residual {residual}")]
    NotCoboundary { order: usize, f: Poly, g: Poly, residual: Poly },
    #[error("residual {residual} on ({f}, {g})")]
    Residual { f: Poly, g: Poly, residual: Poly },
    #[error("products act on {0} and {1} variables")]
    VarCount(usize, usize),
}

/// h-free linear map given by its images on monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    nvars: usize,
    images: HashMap<Monomial, Poly>,
}

impl LinearMap {
    pub fn zero(nvars: usize) -> Self {
        LinearMap { nvars, images: HashMap::new() }
    }

    pub fn image(&self, m: &Monomial) -> Poly {
        self.images.get(m).cloned().unwrap_or_else(|| Poly::zero(self.nvars))
    }

    /// Extended h-linearly. Monomials outside the solved domain map to zero.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in f.terms() {
            if let Some(img) = self.images.get(m) {
                out += &img.scale_h(c);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.images.values().all(Poly::is_zero)
    }

    /// Number of monomials with nonzero image.
    pub fn support(&self) -> usize {
        self.images.values().filter(|p| !p.is_zero()).count()
    }
}

#[derive(Clone, Debug)]
pub struct Equivalence {
    /// `maps[n-1] = T_n`.
    pub maps: Vec<LinearMap>,
    pub degree: u32,
    pub order: usize,
    pub pairs_checked: usize,
}

impl Equivalence {
    /// `T f = f + sum_n h^n T_n f`, truncated at the solved order.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = f.clone();
        for (k, t) in self.maps.iter().enumerate() {
            out += &t.apply(f).shift_h(k + 1);
        }
        out.truncate_h(self.order)
    }
}

struct SliceCache<'a> {
    star: &'a dyn StarProduct,
    order: usize,
    map: HashMap<(Monomial, Monomial), Vec<Poly>>,
}

impl<'a> SliceCache<'a> {
    fn new(star: &'a dyn StarProduct, order: usize) -> Self {
        SliceCache { star, order, map: HashMap::new() }
    }

    fn slices(&mut self, a: &Monomial, b: &Monomial) -> &Vec<Poly> {
        let key = (a.clone(), b.clone());
        let (star, order) = (self.star, self.order);
        self.map.entry(key).or_insert_with(|| {
            let n = a.nvars();
            let p = star.star(&Poly::term(a.clone(), HPoly::one()), &Poly::term(b.clone(), HPoly::one()));
            (0..=order).map(|k| p.h_slice(k)).collect::<Vec<_>>().into_iter().map(|s| {
                if s.is_zero() { Poly::zero(n) } else { s }
            }).collect()
        })
    }

    /// `k`-th coefficient of `f * g` for h-free `f`, `g`.
    fn bilinear(&mut self, f: &Poly, g: &Poly, k: usize) -> Poly {
        let n = f.nvars();
        let mut out = Poly::zero(n);
        if k == 0 {
            return f * g;
        }
        for (mf, cf) in f.terms() {
            for (mg, cg) in g.terms() {
                let c = cf * cg;
                let s = self.slices(mf, mg)[k].clone();
                out += &s.scale_h(&c);
            }
        }
        out
    }
}

fn mono(m: &Monomial) -> Poly {
    Poly::term(m.clone(), HPoly::one())
}

fn apply_t(t: &[LinearMap], a: usize, f: &Poly) -> Poly {
    if a == 0 {
        f.clone()
    } else {
        t[a - 1].apply(f)
    }
}

/// `E_n(f, g)` from the already fixed `T_1..T_(n-1)`.
fn defect(n: usize, f: &Monomial, g: &Monomial, t: &[LinearMap], ca: &mut SliceCache, cb: &mut SliceCache) -> Poly {
    let nv = f.nvars();
    let (pf, pg) = (mono(f), mono(g));
    let mut out = Poly::zero(nv);
    for a in 0..n {
        let ak = ca.slices(f, g)[n - a].clone();
        out += &apply_t(t, a, &ak);
    }
    let tf: Vec<Poly> = (0..n).map(|a| apply_t(t, a, &pf)).collect();
    let tg: Vec<Poly> = (0..n).map(|b| apply_t(t, b, &pg)).collect();
    for a in 0..n {
        for b in 0..n {
            if a + b > n {
                continue;
            }
            let k = n - a - b;
            out -= &cb.bilinear(&tf[a], &tg[b], k);
        }
    }
    out
}

/// `D(x^alpha)` for the derivation with `D(x_j) = mu` and all other images zero.
fn derivation_image(j: usize, mu: &Monomial, m: &Monomial) -> Poly {
    let e = m.exp(j);
    if e == 0 {
        return Poly::zero(m.nvars());
    }
    let rest = m.div(&Monomial::var(m.nvars(), j));
    Poly::term(rest.mul(mu), HPoly::constant(Rational::from_integer((e as i64).into())))
}

fn derivation_apply(j: usize, mu: &Monomial, f: &Poly) -> Poly {
    let mut out = Poly::zero(f.nvars());
    for (m, c) in f.terms() {
        out += &derivation_image(j, mu, m).scale_h(c);
    }
    out
}

pub fn equivalence_solver(
    a: &dyn StarProduct,
    b: &dyn StarProduct,
    cfg: EquivalenceConfig,
) -> Result<Equivalence, EquivalenceError> {
    let n = a.nvars();
    if b.nvars() != n {
        return Err(EquivalenceError::VarCount(n, b.nvars()));
    }
    let r = cfg.order;
    let big = 2 * cfg.degree;
    let mons = Monomial::all_up_to_degree(n, big);
    let pairs: Vec<(Monomial, Monomial)> = mons
        .iter()
        .flat_map(|f| mons.iter().filter(move |g| f.degree() + g.degree() <= big).map(move |g| (f.clone(), g.clone())))
        .collect();
    let der_basis: Vec<(usize, Monomial)> = (0..n)
        .flat_map(|j| Monomial::all_up_to_degree(n, cfg.derivation_degree).into_iter().map(move |mu| (j, mu)))
        .collect();
    let mut ca = SliceCache::new(a, r);
    let mut cb = SliceCache::new(b, r);
    let mut t: Vec<LinearMap> = Vec::new();

    for ord in 1..=r {
        if ord >= 2 {
            fix_derivation(ord, &pairs, &der_basis, &mut t, &mut ca, &mut cb, &mons)?;
        }
        let mut e: HashMap<(Monomial, Monomial), Poly> = HashMap::new();
        for (f, g) in &pairs {
            e.insert((f.clone(), g.clone()), defect(ord, f, g, &t, &mut ca, &mut cb));
        }
        for (f, g) in &pairs {
            if f < g {
                let anti = &e[&(f.clone(), g.clone())] - &e[&(g.clone(), f.clone())];
                if !anti.is_zero() {
                    return Err(EquivalenceError::NotEquivalent { order: ord, f: mono(f), g: mono(g), residual: anti });
                }
            }
        }
        // particular solution: T(1) = T(x_i) = 0, T(x_i m) = x_i T(m) - E(x_i, m)
        let mut tn = LinearMap::zero(n);
        for m in &mons {
            if m.degree() <= 1 {
                tn.images.insert(m.clone(), Poly::zero(n));
                continue;
            }
            let i = (0..n).find(|&i| m.exp(i) > 0).unwrap();
            let xi = Monomial::var(n, i);
            let rest = m.div(&xi);
            let img = &tn.image(&rest).mul_monomial(&xi) - &e[&(xi, rest)];
            tn.images.insert(m.clone(), img);
        }
        for (f, g) in &pairs {
            let fg = f.mul(g);
            let cob = &(&(&tn.image(g).mul_monomial(f) - &tn.image(&fg)) + &tn.image(f).mul_monomial(g))
                - &e[&(f.clone(), g.clone())];
            if !cob.is_zero() {
                return Err(EquivalenceError::NotCoboundary { order: ord, f: mono(f), g: mono(g), residual: cob });
            }
        }
        t.push(tn);
    }

    let eq = Equivalence { maps: t, degree: cfg.degree, order: r, pairs_checked: 0 };
    let small: Vec<&Monomial> = mons.iter().filter(|m| m.degree() <= cfg.degree).collect();
    let mut checked = 0;
    for f in &small {
        for g in &small {
            let (pf, pg) = (mono(f), mono(g));
            let lhs = eq.apply(&a.star(&pf, &pg).truncate_h(r));
            let rhs = b.star(&eq.apply(&pf), &eq.apply(&pg)).truncate_h(r);
            let residual = &lhs - &rhs;
            checked += 1;
            if !residual.is_zero() {
                return Err(EquivalenceError::Residual { f: pf, g: pg, residual });
            }
        }
    }
    Ok(Equivalence { pairs_checked: checked, ..eq })
}

/// Choose the derivation part of `T_(ord-1)` so that `E_ord` is symmetric.
fn fix_derivation(
    ord: usize,
    pairs: &[(Monomial, Monomial)],
    der_basis: &[(usize, Monomial)],
    t: &mut [LinearMap],
    ca: &mut SliceCache,
    cb: &mut SliceCache,
    mons: &[Monomial],
) -> Result<(), EquivalenceError> {
    let mut sys = LinearSystem::new(der_basis.len());
    for (f, g) in pairs {
        if f >= g {
            continue;
        }
        let anti = &defect(ord, f, g, t, ca, cb) - &defect(ord, g, f, t, ca, cb);
        let (pf, pg) = (mono(f), mono(g));
        let a1_fg = ca.slices(f, g)[1].clone();
        let a1_gf = ca.slices(g, f)[1].clone();
        let mut cols: Vec<Poly> = Vec::with_capacity(der_basis.len());
        for (j, mu) in der_basis {
            let df = derivation_apply(*j, mu, &pf);
            let dg = derivation_apply(*j, mu, &pg);
            let l_fg = &(&derivation_apply(*j, mu, &a1_fg) - &cb.bilinear(&df, &pg, 1)) - &cb.bilinear(&pf, &dg, 1);
            let l_gf = &(&derivation_apply(*j, mu, &a1_gf) - &cb.bilinear(&dg, &pf, 1)) - &cb.bilinear(&pg, &df, 1);
            cols.push(&l_fg - &l_gf);
        }
        let support: BTreeSet<Monomial> =
            cols.iter().chain(std::iter::once(&anti)).flat_map(|p| p.terms().map(|(m, _)| m.clone())).collect();
        for m in support {
            let row = cols
                .iter()
                .enumerate()
                .filter_map(|(c, p)| {
                    let v = p.coeff(&m).constant_term();
                    (!v.is_zero()).then_some((c, v))
                })
                .collect();
            if !sys.push(row, -anti.coeff(&m).constant_term()) {
                return Err(EquivalenceError::NotEquivalent { order: ord, f: pf, g: pg, residual: anti });
            }
        }
    }
    let u = sys.solve().expect("consistent");
    let target = &mut t[ord - 2];
    for m in mons {
        let mut add = Poly::zero(m.nvars());
        for ((j, mu), c) in der_basis.iter().zip(&u) {
            if !c.is_zero() {
                add += &derivation_image(*j, mu, m).scale(c);
            }
        }
        if !add.is_zero() {
            let img = &target.image(m) + &add;
            target.images.insert(m.clone(), img);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::catalog;
    use crate::weyl::Weyl;
    use std::sync::Arc;

    #[test]
    fn identical_products_give_zero_gauge() {
        let w = Weyl::for_algebra(Arc::new(catalog("su2").unwrap()));
        let cfg = EquivalenceConfig { degree: 2, order: 2, derivation_degree: 1 };
        let eq = equivalence_solver(&w, &w, cfg).unwrap();
        assert!(eq.maps.iter().all(LinearMap::is_zero));
        assert!(eq.pairs_checked > 0);
    }

    #[test]
    fn different_brackets_are_rejected() {
        let su2 = Weyl::for_algebra(Arc::new(catalog("su2").unwrap()));
        let hz = Weyl::for_algebra(Arc::new(catalog("heisenberg").unwrap()));
        let cfg = EquivalenceConfig { degree: 1, order: 1, derivation_degree: 1 };
        assert!(matches!(equivalence_solver(&su2, &hz, cfg), Err(EquivalenceError::NotEquivalent { order: 1, .. })));
    }
}
