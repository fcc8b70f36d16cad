//! The quantization map `psi`, the algebraic star product `*_P` and its
//! reduction to the orbit, the isomorphism `eta = Sym^-1 o psi`, tangentiality
//! checks, the shift bookkeeping `c_i(h) = c_i + h Delta_i(h)`, and an
//! order-by-order gauge-equivalence solver.

mod equivalence;

pub use equivalence::{equivalence_solver, Equivalence, EquivalenceConfig, EquivalenceError, LinearMap};

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::coeff::{HPoly, Monomial, Poly, Rational};
use crate::orbit::{GroebnerBasis, OrbitError, OrbitIdeal};
use crate::pbw::{EnvelopingAlgebra, PBWElement, Word};
use crate::weyl::Weyl;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgStarError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("c_{index}(0) = {got} differs from c_{index} = {want}")]
    ShiftAtZero { index: usize, got: Rational, want: Rational },
    #[error("expected {expected} values, got {got}")]
    Count { expected: usize, got: usize },
    #[error("input is not in normal form: {0}")]
    NotNormal(String),
}

/// A star product on polynomials in `nvars` variables. Inputs may carry h;
/// products are extended h-bilinearly.
pub trait StarProduct: Send + Sync {
    fn name(&self) -> String;
    fn nvars(&self) -> usize;
    fn star(&self, f: &Poly, g: &Poly) -> Poly;
}

impl StarProduct for Weyl {
    fn name(&self) -> String {
        "S".into()
    }
    fn nvars(&self) -> usize {
        Weyl::nvars(self)
    }
    fn star(&self, f: &Poly, g: &Poly) -> Poly {
        self.star_s(f, g)
    }
}

/// Any star product cut off above `h^order`.
pub struct Truncated<'a> {
    pub inner: &'a dyn StarProduct,
    pub order: usize,
}

impl StarProduct for Truncated<'_> {
    fn name(&self) -> String {
        format!("{} mod h^{}", self.inner.name(), self.order + 1)
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn star(&self, f: &Poly, g: &Poly) -> Poly {
        self.inner.star(f, g).truncate_h(self.order)
    }
}

/// Data fixing `*_P`: the orbit ideal, the deformed constants `c_i(h)`, and
/// the map used for basis monomials.
pub struct QuantizationData {
    weyl: Arc<Weyl>,
    ideal: Arc<OrbitIdeal>,
    c_h: Vec<HPoly>,
    delta: Vec<HPoly>,
    symmetrized_b: bool,
    /// `P_i - c_i(h)` with `P_i = Sym(p_i)`.
    central: Vec<PBWElement>,
    cache: RwLock<HashMap<(Vec<u32>, Monomial), PBWElement>>,
}

impl QuantizationData {
    /// `c_h = None` means `c_i(h) = c_i`.
    pub fn new(weyl: Arc<Weyl>, ideal: Arc<OrbitIdeal>, c_h: Option<Vec<HPoly>>) -> Result<Self, AlgStarError> {
        if !ideal.is_spanning() {
            return Err(OrbitError::NotSpanning.into());
        }
        let c0 = ideal.c0().to_vec();
        let c_h = c_h.unwrap_or_else(|| c0.iter().map(|c| HPoly::constant(c.clone())).collect());
        if c_h.len() != c0.len() {
            return Err(AlgStarError::Count { expected: c0.len(), got: c_h.len() });
        }
        let mut delta = Vec::new();
        for (i, (ch, c)) in c_h.iter().zip(&c0).enumerate() {
            if &ch.constant_term() != c {
                return Err(AlgStarError::ShiftAtZero { index: i + 1, got: ch.constant_term(), want: c.clone() });
            }
            delta.push((ch - &HPoly::constant(c.clone())).div_h().expect("constant term cancels"));
        }
        let central = ideal
            .algebra()
            .invariants
            .iter()
            .zip(&c_h)
            .map(|(p, ch)| &weyl.sym(p) - &PBWElement::constant(ch.clone()))
            .collect();
        Ok(QuantizationData {
            weyl,
            ideal,
            c_h,
            delta,
            symmetrized_b: false,
            central,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Map basis monomials to `Sym(b)` instead of the ordered word.
    pub fn with_symmetrized_b(mut self) -> Self {
        self.symmetrized_b = true;
        self.cache = RwLock::new(HashMap::new());
        self
    }

    pub fn weyl(&self) -> &Arc<Weyl> {
        &self.weyl
    }

    pub fn ua(&self) -> &Arc<EnvelopingAlgebra> {
        self.weyl.ua()
    }

    pub fn ideal(&self) -> &Arc<OrbitIdeal> {
        &self.ideal
    }

    pub fn c_h(&self) -> &[HPoly] {
        &self.c_h
    }

    pub fn delta(&self) -> &[HPoly] {
        &self.delta
    }

    pub fn nvars(&self) -> usize {
        self.ideal.nvars()
    }

    fn psi_basis(&self, alpha: &[u32], b: &Monomial) -> PBWElement {
        let key = (alpha.to_vec(), b.clone());
        if let Some(hit) = self.cache.read().unwrap().get(&key) {
            return hit.clone();
        }
        let ua = self.ua();
        let mut acc = PBWElement::unit();
        for (c, &a) in self.central.iter().zip(alpha) {
            for _ in 0..a {
                acc = ua.mul(&acc, c);
            }
        }
        let tail = if self.symmetrized_b {
            self.weyl.sym_monomial(b)
        } else {
            PBWElement::word(Word::from_monomial(b), HPoly::one())
        };
        let out = ua.mul(&acc, &tail);
        self.cache.write().unwrap().insert(key, out.clone());
        out
    }

    /// `psi((p - c)^alpha b) = prod (P_i - c_i(h))^alpha_i X_b`, extended h-linearly.
    pub fn psi(&self, f: &Poly) -> PBWElement {
        let mut out = PBWElement::zero();
        for (k, slice) in f.h_slices().iter().enumerate() {
            if slice.is_zero() {
                continue;
            }
            let terms = self.ideal.kostant_decompose(slice).expect("spanning checked at construction");
            for t in terms {
                out.add_scaled(&self.psi_basis(&t.alpha, &t.b), &HPoly::monomial(t.coeff, k));
            }
        }
        out
    }

    /// Inverse of [`QuantizationData::psi`] by descent on the filtration degree.
    pub fn psi_inv(&self, u: &PBWElement) -> Poly {
        let n = self.nvars();
        let mut rest = u.clone();
        let mut out = Poly::zero(n);
        while let Some(d) = rest.degree() {
            let top = rest.part_of_degree(d).symbol(n);
            rest = &rest - &self.psi(&top);
            debug_assert!(rest.degree().map_or(true, |e| e < d));
            out += &top;
        }
        out
    }

    pub fn star_p(&self, f: &Poly, g: &Poly) -> Poly {
        self.psi_inv(&self.ua().mul(&self.psi(f), &self.psi(g)))
    }

    /// `*_P` on normal forms modulo the orbit ideal.
    pub fn star_p_orbit(&self, f: &Poly, g: &Poly) -> Result<Poly, AlgStarError> {
        for p in [f, g] {
            if !self.ideal.is_normal(p) {
                return Err(AlgStarError::NotNormal(p.to_string()));
            }
        }
        Ok(self.ideal.normal_form(&self.star_p(f, g)))
    }

    pub fn eta(&self, f: &Poly) -> Poly {
        self.weyl.sym_inv(&self.psi(f))
    }
}

/// `*_P` as a [`StarProduct`].
pub struct StarP(pub Arc<QuantizationData>);

impl StarProduct for StarP {
    fn name(&self) -> String {
        "P".into()
    }
    fn nvars(&self) -> usize {
        self.0.nvars()
    }
    fn star(&self, f: &Poly, g: &Poly) -> Poly {
        self.0.star_p(f, g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentialityWitness {
    /// 0-based index of the generator `p_i - c_i`.
    pub generator: usize,
    pub side: Side,
    pub f: Poly,
    /// Normal form of the offending product; nonzero.
    pub residue: Poly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentialityReport {
    pub pass: bool,
    pub checked: usize,
    pub witness: Option<TangentialityWitness>,
}

/// A star product is tangential to the orbit when products with a generator
/// of the ideal stay in the ideal.
pub fn tangentiality_check(star: &dyn StarProduct, ideal: &OrbitIdeal, sample: &[Poly]) -> TangentialityReport {
    let mut checked = 0;
    for (i, g) in ideal.generators().iter().enumerate() {
        for f in sample {
            for side in [Side::Left, Side::Right] {
                let prod = match side {
                    Side::Left => star.star(g, f),
                    Side::Right => star.star(f, g),
                };
                checked += 1;
                let residue = ideal.normal_form(&prod);
                if !residue.is_zero() {
                    return TangentialityReport {
                        pass: false,
                        checked,
                        witness: Some(TangentialityWitness { generator: i, side, f: f.clone(), residue }),
                    };
                }
            }
        }
    }
    TangentialityReport { pass: true, checked, witness: None }
}

/// Center data `z_i(y, h)`: polynomials in `m` variables standing for the
/// invariant values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorShift {
    pub z: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaReport {
    /// `Delta_i(h) = z_i(c, h)`.
    pub delta: Vec<HPoly>,
    /// `z_i - Delta_i = sum_j b[i][j] (y_j - c_j)`.
    pub b: Vec<Vec<Poly>>,
    pub factorization_holds: bool,
    /// `det(delta_ij + h b_ij)` as a polynomial in `y` and `h`.
    pub det: Poly,
    pub invertible_at_zero: bool,
    /// Whether the shift reproduces the `Delta` of the quantization data.
    pub matches_quantization: bool,
}

fn poly_det(m: &[Vec<Poly>], nvars: usize) -> Poly {
    match m.len() {
        0 => Poly::one(nvars),
        1 => m[0][0].clone(),
        n => {
            let mut out = Poly::zero(nvars);
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, v)| v.clone()).collect()).collect();
                let t = &m[0][col] * &poly_det(&minor, nvars);
                if col % 2 == 0 {
                    out += &t;
                } else {
                    out -= &t;
                }
            }
            out
        }
    }
}

pub fn compute_delta(q: &QuantizationData, shift: &GeneratorShift) -> Result<DeltaReport, AlgStarError> {
    let c0 = q.ideal().c0();
    let m = c0.len();
    if shift.z.len() != m {
        return Err(AlgStarError::Count { expected: m, got: shift.z.len() });
    }
    for z in &shift.z {
        if z.nvars() != m {
            return Err(AlgStarError::Count { expected: m, got: z.nvars() });
        }
    }
    let gens: Vec<Poly> = (0..m).map(|j| &Poly::var(m, j) - &Poly::from_rational(m, c0[j].clone())).collect();
    let gb = GroebnerBasis::buchberger(&gens);
    let delta: Vec<HPoly> = shift.z.iter().map(|z| z.eval(c0)).collect();
    let mut b = Vec::new();
    let mut holds = true;
    for (z, d) in shift.z.iter().zip(&delta) {
        let diff = z - &Poly::constant(m, d.clone());
        let (w, r) = gb.witness(&diff);
        let mut rebuilt = Poly::zero(m);
        for (wj, g) in w.iter().zip(&gens) {
            rebuilt += &(wj * g);
        }
        holds &= r.is_zero() && rebuilt == diff;
        b.push(w);
    }
    let h = Poly::h(m);
    let mat: Vec<Vec<Poly>> = (0..m)
        .map(|i| (0..m).map(|j| {
            let e = &h * &b[i][j];
            if i == j { &Poly::one(m) + &e } else { e }
        }).collect())
        .collect();
    let det = poly_det(&mat, m);
    let det0 = det.h_slice(0);
    let invertible_at_zero = det0.degree() == Some(0) && !det0.is_zero();
    let matches_quantization = delta.as_slice() == q.delta();
    Ok(DeltaReport { delta, b, factorization_holds: holds, det, invertible_at_zero, matches_quantization })
}

/// `sum_j a^j / j! d^j f = f(y + a)` for center data; `a` is one h-series per
/// variable.
pub fn center_shift(f: &Poly, a: &[HPoly]) -> Poly {
    let m = f.nvars();
    let deg = f.degree().unwrap_or(0);
    let mut out = Poly::zero(m);
    for mono in Monomial::all_up_to_degree(m, deg) {
        let d = f.partial_multi(mono.exponents());
        if d.is_zero() {
            continue;
        }
        let mut coeff = HPoly::one();
        for (ai, &j) in a.iter().zip(mono.exponents()) {
            let fact: u64 = (1..=j as u64).product();
            coeff = &coeff * &ai.pow(j).scale(&Rational::from_integer(fact.into()).recip());
        }
        out += &d.scale_h(&coeff);
    }
    out
}

/// Whether `f` has zero coefficients at every power of h strictly below `k`.
pub fn h_order_at_least(f: &Poly, k: usize) -> bool {
    f.h_order().map_or(true, |o| o >= k)
}

/// Coefficientwise `h^0` product check used by the property suites.
pub fn classical_limit_ok(star: &dyn StarProduct, f: &Poly, g: &Poly) -> bool {
    (star.star(f, g).h_slice(0)) == (&f.h_slice(0) * &g.h_slice(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, ratio};
    use crate::lie::catalog;

    fn setup(name: &str, c0: Vec<Rational>, c_h: Option<Vec<HPoly>>) -> QuantizationData {
        let a = Arc::new(catalog(name).unwrap());
        let w = Arc::new(Weyl::for_algebra(a.clone()));
        let o = Arc::new(OrbitIdeal::new(a, c0).unwrap());
        QuantizationData::new(w, o, c_h).unwrap()
    }

    fn x(i: usize) -> Poly {
        Poly::var(3, i - 1)
    }

    fn casimir() -> Poly {
        &(&x(1).pow(2) + &x(2).pow(2)) + &x(3).pow(2)
    }

    #[test]
    fn psi_examples() {
        let ch = vec![HPoly::from_coeffs(vec![rat(1), rat(1)])];
        let q = setup("su2", vec![rat(1)], Some(ch.clone()));
        assert_eq!(q.psi(&Poly::one(3)), PBWElement::unit());
        let g = &casimir() - &Poly::one(3);
        let want = &q.weyl().sym(&casimir()) - &PBWElement::constant(ch[0].clone());
        assert_eq!(q.psi(&g), want);
        let b = &x(1) * &x(3);
        assert_eq!(q.psi(&b), q.ua().normal_order(&[0, 2]).unwrap());
    }

    #[test]
    fn psi_inv_examples() {
        let ch = vec![HPoly::from_coeffs(vec![rat(1), rat(0), ratio(1, 3)])];
        let q = setup("su2", vec![rat(1)], Some(ch.clone()));
        assert_eq!(q.psi_inv(&PBWElement::unit()), Poly::one(3));
        let got = q.psi_inv(&q.weyl().sym(&casimir()));
        let want = &(&casimir() - &Poly::one(3)) + &Poly::constant(3, ch[0].clone());
        assert_eq!(got, want);
        let f = &(&x(1).pow(3) * &x(3)) + &(&x(2) * &x(3).pow(2));
        assert_eq!(q.psi_inv(&q.psi(&f)), f);
    }

    #[test]
    fn star_p_examples() {
        let q = setup("su2", vec![rat(1)], None);
        let f = &x(1).pow(2) + &(&x(2) * &x(3));
        assert_eq!(q.star_p(&f, &Poly::one(3)), f);
        assert_eq!(q.star_p(&f, &casimir()), &f * &casimir());
        let comm = &q.star_p(&x(1), &x(2)) - &q.star_p(&x(2), &x(1));
        assert_eq!(comm, &Poly::h(3) * &x(3));
    }

    #[test]
    fn star_p_orbit_examples() {
        let q = setup("su2", vec![rat(2)], None);
        let f = &x(1) * &x(2);
        let p_nf = q.ideal().normal_form(&casimir());
        assert_eq!(q.star_p_orbit(&p_nf, &f).unwrap(), f.scale(&rat(2)));
        assert_eq!(q.star_p_orbit(&Poly::one(3), &f).unwrap(), f);
        assert!(matches!(q.star_p_orbit(&x(3).pow(2), &f), Err(AlgStarError::NotNormal(_))));
    }

    #[test]
    fn eta_examples() {
        let ch = vec![HPoly::from_coeffs(vec![rat(1), rat(1)])];
        let q = setup("su2", vec![rat(1)], Some(ch.clone()));
        assert_eq!(q.eta(&Poly::one(3)), Poly::one(3));
        let got = q.eta(&(&casimir() - &Poly::one(3)));
        assert_eq!(got, &casimir() - &Poly::constant(3, ch[0].clone()));
    }

    #[test]
    fn tangentiality_examples() {
        let q = Arc::new(setup("su2", vec![rat(1)], None));
        let sample = vec![x(1), &x(2) * &x(3)];
        assert!(tangentiality_check(&StarP(q.clone()), q.ideal(), &sample).pass);
        let rep = tangentiality_check(q.weyl().as_ref(), q.ideal(), &sample);
        assert!(!rep.pass);
        let w = rep.witness.unwrap();
        assert_eq!(w.f, x(1));
        assert_eq!(w.residue, &Poly::constant(3, HPoly::monomial(ratio(-1, 3), 2)) * &x(1));

        let hz = setup("heisenberg", vec![rat(1)], None);
        let sample = vec![x(1), x(2), &x(1) * &x(2).pow(2)];
        assert!(tangentiality_check(hz.weyl().as_ref(), hz.ideal(), &sample).pass);
    }

    #[test]
    fn delta_examples() {
        let c = rat(3);
        let q = setup("su2", vec![c.clone()], None);
        let y = Poly::var(1, 0);
        let h = Poly::h(1);
        // constant in p
        let r = compute_delta(&q, &GeneratorShift { z: vec![&h + &Poly::from_rational(1, rat(5))] }).unwrap();
        assert_eq!(r.delta, vec![HPoly::from_coeffs(vec![rat(5), rat(1)])]);
        assert_eq!(r.b, vec![vec![Poly::zero(1)]]);
        // z = p
        let r = compute_delta(&q, &GeneratorShift { z: vec![y.clone()] }).unwrap();
        assert_eq!(r.delta, vec![HPoly::constant(c.clone())]);
        assert_eq!(r.b, vec![vec![Poly::one(1)]]);
        assert!(r.invertible_at_zero && r.factorization_holds);
        // z = p^2 + h p
        let z = &y.pow(2) + &(&h * &y);
        let r = compute_delta(&q, &GeneratorShift { z: vec![z] }).unwrap();
        assert_eq!(r.delta, vec![HPoly::from_coeffs(vec![rat(9), rat(3)])]);
        assert_eq!(r.b, vec![vec![&(&y + &Poly::from_rational(1, c.clone())) + &h]]);
        assert!(r.factorization_holds && r.invertible_at_zero);
        assert!(!r.matches_quantization);
    }

    #[test]
    fn center_shift_is_taylor() {
        let y = Poly::var(2, 0);
        let v = Poly::var(2, 1);
        let f = &(&y.pow(3) * &v) + &v.pow(2);
        let a = vec![HPoly::from_coeffs(vec![rat(0), rat(2)]), HPoly::monomial(ratio(1, 2), 2)];
        let images = vec![&y + &Poly::constant(2, a[0].clone()), &v + &Poly::constant(2, a[1].clone())];
        assert_eq!(center_shift(&f, &a), f.compose(&images).unwrap());
    }
}
