//! h-graded differential and bidifferential operators with smooth coefficients.
//!
//! Operators act on [`HJet`]s. An `HJet` of level `L` stores its `h^m`
//! component as a jet of order `L + H - m`; an operator whose `h^a` slot
//! differentiates at most `a + e` times maps level `L` to level `L - e`.
//! With filtered operators (`e = 0`) every value up to `h^H` needs only
//! `H`-jets of the inputs.

use std::collections::BTreeMap;

use super::func::{Evaluator, SmoothFunc};
use super::jet::{degree, Jet, MultiIndex};
use super::GlueError;

#[derive(Clone, Debug)]
pub struct HJet {
    pub level: usize,
    pub comps: Vec<Jet>,
}

impl HJet {
    /// `f` as an h-free series at level `level`.
    pub fn from_func(ev: &mut Evaluator, f: &SmoothFunc, h: usize, level: usize) -> Result<HJet, GlueError> {
        let mut comps = vec![ev.jet(f, level + h)?];
        for m in 1..=h {
            comps.push(Jet::zero(ev.base().clone(), level + h - m));
        }
        Ok(HJet { level, comps })
    }

    pub fn h(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(Jet::value).collect()
    }

    pub fn sub(&self, other: &HJet) -> HJet {
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect();
        HJet { level: self.level.min(other.level), comps }
    }

    /// `(x_i - c) * self`
    pub fn times_affine(&self, i: usize, c: f64) -> HJet {
        let comps = self
            .comps
            .iter()
            .map(|j| {
                let mut x = Jet::coordinate(j.base().clone(), j.order(), i);
                let one = Jet::constant(j.base().clone(), j.order(), c);
                x = x.sub(&one);
                x.mul(j)
            })
            .collect();
        HJet { level: self.level, comps }
    }
}

fn order_at(level: usize, h: usize, m: usize) -> usize {
    level + h - m
}

/// `sum_a h^a sum_alpha c_{a,alpha} d^alpha`
#[derive(Clone, Debug)]
pub struct DiffOp {
    pub n: usize,
    pub slots: Vec<BTreeMap<MultiIndex, SmoothFunc>>,
}

fn binom(a: &[u32], g: &[u32]) -> f64 {
    a.iter()
        .zip(g)
        .map(|(&n, &k)| (1..=k).fold(1.0, |acc, i| acc * f64::from(n - k + i) / f64::from(i)))
        .product()
}

fn sub_indices(a: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![vec![]];
    for &k in a {
        out = out.into_iter().flat_map(|p: MultiIndex| (0..=k).map(move |j| [p.clone(), vec![j]].concat())).collect();
    }
    out
}

impl DiffOp {
    pub fn zero(n: usize, h: usize) -> Self {
        DiffOp { n, slots: vec![BTreeMap::new(); h + 1] }
    }

    pub fn identity(n: usize, h: usize) -> Self {
        let mut d = Self::zero(n, h);
        d.add_term(0, vec![0; n], SmoothFunc::one());
        d
    }

    /// `sum_i X_i d_i` in the `h^0` slot.
    pub fn vector_field(field: &[SmoothFunc], h: usize) -> Self {
        let n = field.len();
        let mut d = Self::zero(n, h);
        for (i, c) in field.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            d.add_term(0, e, c.clone());
        }
        d
    }

    pub fn h(&self) -> usize {
        self.slots.len() - 1
    }

    pub fn add_term(&mut self, slot: usize, index: MultiIndex, c: SmoothFunc) {
        if slot > self.h() || c.is_zero() {
            return;
        }
        let e = self.slots[slot].entry(index.clone()).or_insert_with(SmoothFunc::zero);
        *e = e.add(&c);
        if e.is_zero() {
            self.slots[slot].remove(&index);
        }
    }

    pub fn is_identity(&self) -> bool {
        let s0 = &self.slots[0];
        s0.len() == 1 && s0.get(&vec![0; self.n]).and_then(SmoothFunc::as_const) == Some(1.0)
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (a, s) in other.slots.iter().enumerate() {
            for (idx, c) in s {
                out.add_term(a, idx.clone(), c.clone());
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> DiffOp {
        self.mul_func(&SmoothFunc::constant(s))
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.scale(-1.0))
    }

    /// `phi * self`
    pub fn mul_func(&self, phi: &SmoothFunc) -> DiffOp {
        let mut out = DiffOp::zero(self.n, self.h());
        for (a, s) in self.slots.iter().enumerate() {
            for (idx, c) in s {
                out.add_term(a, idx.clone(), phi.mul(c));
            }
        }
        out
    }

    /// `h^k * self`, dropping slots past `H`.
    pub fn shift_h(&self, k: usize) -> DiffOp {
        let mut out = DiffOp::zero(self.n, self.h());
        for (a, s) in self.slots.iter().enumerate().take((self.h() + 1).saturating_sub(k)) {
            out.slots[a + k] = s.clone();
        }
        out
    }

    /// `self o other` by Leibniz; orders past `H` are dropped.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let h = self.h().min(other.h());
        let mut out = DiffOp::zero(self.n, h);
        for (a, s1) in self.slots.iter().enumerate().take(h + 1) {
            for (b, s2) in other.slots.iter().enumerate().take(h + 1 - a) {
                for (alpha, phi) in s1 {
                    for (beta, psi) in s2 {
                        for g in sub_indices(alpha) {
                            let idx: MultiIndex =
                                alpha.iter().zip(&g).zip(beta).map(|((x, y), z)| x - y + z).collect();
                            let c = phi.mul(&psi.deriv(&g)).scale(binom(alpha, &g));
                            out.add_term(a + b, idx, c);
                        }
                    }
                }
            }
        }
        out
    }

    /// Neumann series `sum_k (Id - D)^k` mod `h^(H+1)`.
    pub fn invert(&self) -> Result<DiffOp, GlueError> {
        if !self.is_identity() {
            return Err(GlueError::Usage("inverse needs the identity in the h^0 slot".into()));
        }
        let id = DiffOp::identity(self.n, self.h());
        let nil = id.sub(self);
        let mut out = id.clone();
        let mut p = id;
        for _ in 0..self.h() {
            p = p.compose(&nil);
            out = out.add(&p);
        }
        Ok(out)
    }

    /// `exp(h X) = sum_k h^k X^k / k!` for `X` in the `h^0` slot.
    pub fn exp_h(x: &DiffOp) -> DiffOp {
        let h = x.h();
        let mut out = DiffOp::identity(x.n, h);
        let mut p = DiffOp::identity(x.n, h);
        let mut fact = 1.0;
        for k in 1..=h {
            p = p.compose(x);
            fact *= k as f64;
            out = out.add(&p.scale(1.0 / fact).shift_h(k));
        }
        out
    }

    /// `max (|alpha| - a)` over all terms, at least zero.
    pub fn excess(&self) -> usize {
        self.slots
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.keys().map(move |i| degree(i).saturating_sub(a)))
            .max()
            .unwrap_or(0)
    }

    pub fn max_derivative(&self) -> usize {
        self.slots.iter().flat_map(|s| s.keys().map(|i| degree(i))).max().unwrap_or(0)
    }

    pub fn apply(&self, ev: &mut Evaluator, f: &HJet) -> Result<HJet, GlueError> {
        let e = self.excess();
        let h = f.h().min(self.h());
        if f.level < e {
            return Err(GlueError::Usage(format!("jet level {} below operator excess {e}", f.level)));
        }
        let level = f.level - e;
        let mut comps = Vec::with_capacity(h + 1);
        for m in 0..=h {
            let ord = order_at(level, h, m);
            let mut acc = Jet::zero(ev.base().clone(), ord);
            for a in 0..=m {
                for (idx, c) in &self.slots[a] {
                    let df = f.comps[m - a].differentiate(idx)?.truncate(ord);
                    acc.add_assign(&ev.jet(c, ord)?.mul(&df));
                }
            }
            comps.push(acc);
        }
        Ok(HJet { level, comps })
    }

    /// Largest `|coefficient(x)|` in each h-slot.
    pub fn coeff_norms(&self, x: &[f64]) -> Result<Vec<f64>, GlueError> {
        let mut ev = Evaluator::new(x);
        self.slots
            .iter()
            .map(|s| s.values().map(|c| Ok(ev.jet(c, 0)?.value().abs())).try_fold(0.0f64, |m, v| v.map(|v| m.max(v))))
            .collect()
    }
}

/// `f(x)` series for `D f` at `x`.
pub fn apply_diffop(d: &DiffOp, f: &SmoothFunc, x: &[f64]) -> Result<Vec<f64>, GlueError> {
    let mut ev = Evaluator::new(x);
    let fj = HJet::from_func(&mut ev, f, d.h(), d.excess())?;
    Ok(d.apply(&mut ev, &fj)?.values())
}

/// `sum_c h^c sum phi d^alpha f d^beta g`
#[derive(Clone, Debug)]
pub struct LocalStar {
    pub n: usize,
    pub slots: Vec<Vec<(SmoothFunc, MultiIndex, MultiIndex)>>,
}

impl LocalStar {
    /// Moyal product for a constant bivector `pi`.
    pub fn moyal(pi: &[Vec<f64>], h: usize) -> LocalStar {
        let n = pi.len();
        let mut slots: Vec<BTreeMap<(MultiIndex, MultiIndex), f64>> = vec![BTreeMap::new(); h + 1];
        slots[0].insert((vec![0; n], vec![0; n]), 1.0);
        for c in 1..=h {
            let prev: Vec<_> = slots[c - 1].iter().map(|(k, v)| (k.clone(), *v)).collect();
            for ((a, b), v) in prev {
                for i in 0..n {
                    for j in 0..n {
                        if pi[i][j] == 0.0 {
                            continue;
                        }
                        let (mut a2, mut b2) = (a.clone(), b.clone());
                        a2[i] += 1;
                        b2[j] += 1;
                        *slots[c].entry((a2, b2)).or_insert(0.0) += v * pi[i][j] / (2.0 * c as f64);
                    }
                }
            }
        }
        let slots = slots
            .into_iter()
            .map(|s| s.into_iter().filter(|(_, v)| *v != 0.0).map(|((a, b), v)| (SmoothFunc::constant(v), a, b)).collect())
            .collect();
        LocalStar { n, slots }
    }

    pub fn h(&self) -> usize {
        self.slots.len() - 1
    }

    pub fn excess(&self) -> usize {
        self.slots
            .iter()
            .enumerate()
            .flat_map(|(c, s)| s.iter().map(move |(_, a, b)| degree(a).max(degree(b)).saturating_sub(c)))
            .max()
            .unwrap_or(0)
    }

    pub fn apply(&self, ev: &mut Evaluator, f: &HJet, g: &HJet) -> Result<HJet, GlueError> {
        let e = self.excess();
        let lin = f.level.min(g.level);
        if lin < e {
            return Err(GlueError::Usage(format!("jet level {lin} below product excess {e}")));
        }
        let level = lin - e;
        let h = self.h().min(f.h()).min(g.h());
        let mut comps = Vec::with_capacity(h + 1);
        for m in 0..=h {
            let ord = order_at(level, h, m);
            let mut acc = Jet::zero(ev.base().clone(), ord);
            for c in 0..=m {
                for (phi, alpha, beta) in &self.slots[c] {
                    for a in 0..=(m - c) {
                        let b = m - c - a;
                        let df = f.comps[a].differentiate(alpha)?.truncate(ord);
                        let dg = g.comps[b].differentiate(beta)?.truncate(ord);
                        acc.add_assign(&ev.jet(phi, ord)?.mul(&df.mul(&dg)));
                    }
                }
            }
            comps.push(acc);
        }
        Ok(HJet { level, comps })
    }
}

/// The value series of `f *_r g` at `x`.
pub fn local_star_values(star: &LocalStar, f: &SmoothFunc, g: &SmoothFunc, x: &[f64]) -> Result<Vec<f64>, GlueError> {
    let mut ev = Evaluator::new(x);
    let e = star.excess();
    let fj = HJet::from_func(&mut ev, f, star.h(), e)?;
    let gj = HJet::from_func(&mut ev, g, star.h(), e)?;
    Ok(star.apply(&mut ev, &fj, &gj)?.values())
}

#[cfg(test)]
mod tests {
    use super::super::func::parse_smooth;
    use super::*;

    fn d1(n: usize, h: usize, slot: usize, c: &str) -> DiffOp {
        let mut d = DiffOp::zero(n, h);
        let mut e = vec![0; n];
        e[0] = 1;
        d.add_term(slot, e, parse_smooth(c, n).unwrap());
        d
    }

    #[test]
    fn apply_examples() {
        let f = parse_smooth("x1^2", 1).unwrap();
        assert_eq!(apply_diffop(&DiffOp::identity(1, 2), &f, &[3.0]).unwrap(), vec![9.0, 0.0, 0.0]);
        assert_eq!(apply_diffop(&d1(1, 2, 1, "1"), &f, &[3.0]).unwrap()[1], 6.0);
        let hd = d1(1, 2, 1, "1");
        let f3 = parse_smooth("x1^3", 1).unwrap();
        assert_eq!(apply_diffop(&hd.compose(&hd), &f3, &[1.0]).unwrap()[2], 6.0);
    }

    #[test]
    fn leibniz_composition() {
        let n = 1;
        let dx = d1(n, 0, 0, "1");
        let mut x1 = DiffOp::zero(n, 0);
        x1.add_term(0, vec![0], SmoothFunc::coord(0));
        let c = dx.compose(&x1);
        assert_eq!(c.slots[0].len(), 2);
        assert_eq!(c.slots[0][&vec![0]].as_const(), Some(1.0));
        assert!(matches!(c.slots[0][&vec![1]].node(), super::super::func::Node::Coord(0)));
        let id = DiffOp::identity(n, 2);
        let d = d1(n, 2, 1, "exp(x1)");
        assert_eq!(id.compose(&d).slots[1].len(), 1);
    }

    #[test]
    fn inverse_of_id_plus_h_d() {
        let d = DiffOp::identity(1, 2).add(&d1(1, 2, 1, "1"));
        let inv = d.invert().unwrap();
        assert_eq!(inv.slots[1][&vec![1]].as_const(), Some(-1.0));
        assert_eq!(inv.slots[2][&vec![2]].as_const(), Some(1.0));
        assert!(DiffOp::identity(1, 2).invert().unwrap().is_identity());
        assert!(d1(1, 2, 0, "1").invert().is_err());
    }

    #[test]
    fn moyal_first_order_is_half_bracket() {
        let star = LocalStar::moyal(&[vec![0.0, 1.0], vec![-1.0, 0.0]], 2);
        let f = parse_smooth("x1", 2).unwrap();
        let g = parse_smooth("x2", 2).unwrap();
        let v = local_star_values(&star, &f, &g, &[0.3, 0.7]).unwrap();
        assert!((v[0] - 0.21).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15 && v[2] == 0.0);
        let f = parse_smooth("x1^2", 2).unwrap();
        let g = parse_smooth("x2^2", 2).unwrap();
        // x1^2 * x2^2 + 2h x1 x2 + h^2/2 (2*2) * 1/4
        let v = local_star_values(&star, &f, &g, &[1.0, 1.0]).unwrap();
        assert!((v[1] - 2.0).abs() < 1e-14 && (v[2] - 0.5).abs() < 1e-14);
    }
}
