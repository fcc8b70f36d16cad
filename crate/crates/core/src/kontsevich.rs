//! Star products up to `h^2` for polynomial Poisson structures on flat space.
//!
//! `f * g = fg + h B1(f,g) + h^2 B2(f,g)` with
//! `B1 = 1/2 a^ij d_i f d_j g` and
//! `B2 = w_sym2 a^ij a^kl d_ik f d_jl g
//!     + w_loop a^ij d_j a^kl (d_ik f d_l g - d_k f d_il g)`.
//! The two weights are not inserted by hand: [`solve_order2_weights`]
//! recovers them from associativity at order `h^2`.

use num_traits::Zero;
use thiserror::Error;

use crate::algstar::StarProduct;
use crate::coeff::{rat, ratio, HPoly, Monomial, Poly, Rational};
use crate::lie::LieAlgebra;
use crate::linalg::LinearSystem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KontsevichError {
    #[error("alpha^{i}{j} != -alpha^{j}{i}")]
    Antisymmetry { i: usize, j: usize },
    #[error("Jacobi identity fails at ({i},{j},{k})")]
    Jacobi { i: usize, j: usize, k: usize },
    #[error("weight system is inconsistent")]
    Inconsistent,
    #[error("weight system is underdetermined (rank {rank} of 2)")]
    Underdetermined { rank: usize },
    #[error("alpha must be a square matrix of polynomials in its own dimension")]
    Shape,
}

/// Bivector `alpha^ij(x)`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonStructure {
    pub n: usize,
    pub alpha: Vec<Vec<Poly>>,
}

impl PoissonStructure {
    pub fn new(alpha: Vec<Vec<Poly>>) -> Result<Self, KontsevichError> {
        let n = alpha.len();
        if alpha.iter().any(|r| r.len() != n || r.iter().any(|p| p.nvars() != n)) {
            return Err(KontsevichError::Shape);
        }
        let p = PoissonStructure { n, alpha };
        p.validate()?;
        Ok(p)
    }

    /// `alpha^ij = sum_k c_ij^k x_k`
    pub fn from_lie(a: &LieAlgebra) -> Self {
        let n = a.dim;
        let alpha = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut p = Poly::zero(n);
                        for (k, c) in a.bracket(i, j) {
                            p += &Poly::var(n, *k).scale(c);
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        PoissonStructure { n, alpha }
    }

    /// `alpha^12 = x1^2` on the plane.
    pub fn quadratic_plane() -> Self {
        let x1sq = Poly::var(2, 0).pow(2);
        PoissonStructure { n: 2, alpha: vec![vec![Poly::zero(2), x1sq.clone()], vec![-&x1sq, Poly::zero(2)]] }
    }

    pub fn validate(&self) -> Result<(), KontsevichError> {
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                if self.alpha[i][j] != -&self.alpha[j][i] {
                    return Err(KontsevichError::Antisymmetry { i: i + 1, j: j + 1 });
                }
            }
        }
        let d: Vec<Vec<Vec<Poly>>> =
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|l| self.alpha[i][j].partial0(l)).collect()).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = Poly::zero(n);
                    for l in 0..n {
                        s += &(&self.alpha[i][l] * &d[j][k][l]);
                        s += &(&self.alpha[j][l] * &d[k][i][l]);
                        s += &(&self.alpha[k][l] * &d[i][j][l]);
                    }
                    if !s.is_zero() {
                        return Err(KontsevichError::Jacobi { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().flatten().all(Poly::is_zero)
    }

    /// `{f, g} = alpha^ij d_i f d_j g`
    pub fn bracket(&self, f: &Poly, g: &Poly) -> Poly {
        self.b1(f, g).scale(&rat(2))
    }

    pub fn b1(&self, f: &Poly, g: &Poly) -> Poly {
        let n = self.n;
        let df: Vec<Poly> = (0..n).map(|i| f.partial0(i)).collect();
        let dg: Vec<Poly> = (0..n).map(|j| g.partial0(j)).collect();
        let mut out = Poly::zero(n);
        for i in 0..n {
            for j in 0..n {
                if self.alpha[i][j].is_zero() || df[i].is_zero() || dg[j].is_zero() {
                    continue;
                }
                out += &(&self.alpha[i][j] * &(&df[i] * &dg[j]));
            }
        }
        out.scale(&ratio(1, 2))
    }

    /// The two order-2 bidifferential operators, unweighted.
    pub fn b2_parts(&self, f: &Poly, g: &Poly) -> (Poly, Poly) {
        let n = self.n;
        let df: Vec<Poly> = (0..n).map(|i| f.partial0(i)).collect();
        let dg: Vec<Poly> = (0..n).map(|j| g.partial0(j)).collect();
        let ddf: Vec<Vec<Poly>> = (0..n).map(|i| (0..n).map(|k| df[i].partial0(k)).collect()).collect();
        let ddg: Vec<Vec<Poly>> = (0..n).map(|j| (0..n).map(|l| dg[j].partial0(l)).collect()).collect();
        let mut sym2 = Poly::zero(n);
        let mut looped = Poly::zero(n);
        for i in 0..n {
            for j in 0..n {
                let aij = &self.alpha[i][j];
                if aij.is_zero() {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        let akl = &self.alpha[k][l];
                        if akl.is_zero() {
                            continue;
                        }
                        if !ddf[i][k].is_zero() && !ddg[j][l].is_zero() {
                            sym2 += &(&(aij * akl) * &(&ddf[i][k] * &ddg[j][l]));
                        }
                        let dakl = akl.partial0(j);
                        if dakl.is_zero() {
                            continue;
                        }
                        let t = &(&ddf[i][k] * &dg[l]) - &(&df[k] * &ddg[i][l]);
                        if !t.is_zero() {
                            looped += &(&(aij * &dakl) * &t);
                        }
                    }
                }
            }
        }
        (sym2, looped)
    }

    pub fn b2(&self, f: &Poly, g: &Poly, w: &Order2Weights) -> Poly {
        let (s, l) = self.b2_parts(f, g);
        &s.scale(&w.w_sym2) + &l.scale(&w.w_loop)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order2Weights {
    pub w_sym2: Rational,
    pub w_loop: Rational,
}

fn assoc_defect_h2(p: &PoissonStructure, f: &Poly, g: &Poly, k: &Poly, w: &Order2Weights) -> Poly {
    let fg = f * g;
    let gk = g * k;
    let lhs = &(&p.b2(&fg, k, w) + &p.b1(&p.b1(f, g), k)) + &(&p.b2(f, g, w) * k);
    let rhs = &(&p.b2(f, &gk, w) + &p.b1(f, &p.b1(g, k))) + &(f * &p.b2(g, k, w));
    &lhs - &rhs
}

fn assoc_defect_h1(p: &PoissonStructure, f: &Poly, g: &Poly, k: &Poly) -> Poly {
    let lhs = &p.b1(&(f * g), k) + &(&p.b1(f, g) * k);
    let rhs = &p.b1(f, &(g * k)) + &(f * &p.b1(g, k));
    &lhs - &rhs
}

/// Monomials of degree `1..=d`; constants add nothing to the system.
pub fn default_test_polys(n: usize, d: u32) -> Vec<Poly> {
    Monomial::all_up_to_degree(n, d)
        .into_iter()
        .filter(|m| !m.is_one())
        .map(|m| Poly::term(m, HPoly::one()))
        .collect()
}

/// Associativity of the `h^2` term as a linear system in `(w_sym2, w_loop)`.
pub fn weight_system(tests: &[(PoissonStructure, Vec<Poly>)]) -> LinearSystem {
    let zero = Order2Weights { w_sym2: rat(0), w_loop: rat(0) };
    let e1 = Order2Weights { w_sym2: rat(1), w_loop: rat(0) };
    let e2 = Order2Weights { w_sym2: rat(0), w_loop: rat(1) };
    let mut sys = LinearSystem::new(2);
    for (p, polys) in tests {
        for f in polys {
            for g in polys {
                for k in polys {
                    let d0 = assoc_defect_h2(p, f, g, k, &zero);
                    let d1 = &assoc_defect_h2(p, f, g, k, &e1) - &d0;
                    let d2 = &assoc_defect_h2(p, f, g, k, &e2) - &d0;
                    let support: std::collections::BTreeSet<Monomial> =
                        [&d0, &d1, &d2].iter().flat_map(|q| q.terms().map(|(m, _)| m.clone())).collect();
                    for m in support {
                        let row = [(0, d1.coeff(&m).constant_term()), (1, d2.coeff(&m).constant_term())]
                            .into_iter()
                            .filter(|(_, v)| !v.is_zero())
                            .collect();
                        sys.push(row, -d0.coeff(&m).constant_term());
                    }
                }
            }
        }
    }
    sys
}

/// The unique weights making the product associative mod `h^3` on every
/// structure and test polynomial supplied.
pub fn solve_order2_weights(tests: &[(PoissonStructure, Vec<Poly>)]) -> Result<Order2Weights, KontsevichError> {
    let sys = weight_system(tests);
    if sys.inconsistency().is_some() {
        return Err(KontsevichError::Inconsistent);
    }
    if !sys.is_determined() {
        return Err(KontsevichError::Underdetermined { rank: sys.rank() });
    }
    let u = sys.solve().unwrap();
    Ok(Order2Weights { w_sym2: u[0].clone(), w_loop: u[1].clone() })
}

/// Weights solved once from su2 and heisenberg with all test monomials of
/// degree at most 2.
pub fn standard_weights() -> &'static Order2Weights {
    static W: std::sync::OnceLock<Order2Weights> = std::sync::OnceLock::new();
    W.get_or_init(|| {
        let tests: Vec<_> = ["su2", "heisenberg"]
            .iter()
            .map(|n| {
                let a = crate::lie::catalog(n).expect("catalog algebra");
                (PoissonStructure::from_lie(&a), default_test_polys(a.dim, 2))
            })
            .collect();
        solve_order2_weights(&tests).expect("order-2 weights are determined by su2")
    })
}

/// Defects of associativity at orders `h^1` and `h^2` for one triple.
pub fn associativity_defects(p: &PoissonStructure, w: &Order2Weights, f: &Poly, g: &Poly, k: &Poly) -> (Poly, Poly) {
    (assoc_defect_h1(p, f, g, k), assoc_defect_h2(p, f, g, k, w))
}

/// The order-2 product as a [`StarProduct`]; results are cut at `h^2`.
pub struct StarK2 {
    pub poisson: PoissonStructure,
    pub weights: Order2Weights,
}

impl StarK2 {
    pub fn star_k2(&self, f: &Poly, g: &Poly) -> Poly {
        let n = self.poisson.n;
        let fs = f.h_slices();
        let gs = g.h_slices();
        let mut out = Poly::zero(n);
        for (a, fa) in fs.iter().enumerate().take(3) {
            for (b, gb) in gs.iter().enumerate().take(3 - a) {
                if fa.is_zero() || gb.is_zero() {
                    continue;
                }
                let base = a + b;
                out += &(fa * gb).shift_h(base);
                if base < 2 {
                    out += &self.poisson.b1(fa, gb).shift_h(base + 1);
                }
                if base == 0 {
                    out += &self.poisson.b2(fa, gb, &self.weights).shift_h(2);
                }
            }
        }
        out
    }
}

impl StarProduct for StarK2 {
    fn name(&self) -> String {
        "K2".into()
    }
    fn nvars(&self) -> usize {
        self.poisson.n
    }
    fn star(&self, f: &Poly, g: &Poly) -> Poly {
        self.star_k2(f, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::catalog;

    fn x(i: usize) -> Poly {
        Poly::var(3, i - 1)
    }

    #[test]
    fn from_lie_su2_and_heisenberg() {
        let p = PoissonStructure::from_lie(&catalog("su2").unwrap());
        assert_eq!(p.alpha[0][1], x(3));
        assert_eq!(p.alpha[0][2], -&x(2));
        assert_eq!(p.alpha[1][2], x(1));
        assert!(p.validate().is_ok());
        let h = PoissonStructure::from_lie(&catalog("heisenberg").unwrap());
        assert_eq!(h.alpha[0][1], x(3));
        assert!(h.alpha[0][2].is_zero() && h.alpha[1][2].is_zero());
        let ab = crate::lie::LieAlgebra::from_dense("abelian", 2, vec![rat(0); 8], vec![]);
        assert!(PoissonStructure::from_lie(&ab).is_zero());
    }

    #[test]
    fn bad_structures_are_rejected() {
        let mut a = PoissonStructure::quadratic_plane().alpha;
        a[1][0] = Poly::var(2, 0).pow(2);
        assert_eq!(PoissonStructure::new(a), Err(KontsevichError::Antisymmetry { i: 1, j: 2 }));
        // x1 d1^d2 + x2 d2^d3 + x3 d3^d1 style with a wrong sign breaks Jacobi
        let n = 3;
        let z = Poly::zero(n);
        let mut a = vec![vec![z.clone(); 3]; 3];
        a[0][1] = x(3);
        a[1][0] = -&x(3);
        a[1][2] = x(3);
        a[2][1] = -&x(3);
        a[0][2] = x(2);
        a[2][0] = -&x(2);
        assert!(matches!(PoissonStructure::new(a), Err(KontsevichError::Jacobi { .. })));
    }

    #[test]
    fn abelian_structure_leaves_weights_free() {
        let ab = PoissonStructure { n: 2, alpha: vec![vec![Poly::zero(2); 2]; 2] };
        let tests = vec![(ab, default_test_polys(2, 2))];
        assert_eq!(solve_order2_weights(&tests), Err(KontsevichError::Underdetermined { rank: 0 }));
    }

    #[test]
    fn unit_and_first_order() {
        let p = PoissonStructure::from_lie(&catalog("su2").unwrap());
        let k = StarK2 { poisson: p, weights: Order2Weights { w_sym2: ratio(1, 8), w_loop: ratio(1, 12) } };
        let f = &x(1).pow(2) + &x(2);
        assert_eq!(k.star(&f, &Poly::one(3)), f);
        assert_eq!(k.star(&Poly::one(3), &f), f);
        let comm = &k.star(&x(1), &x(2)) - &k.star(&x(2), &x(1));
        assert_eq!(comm, &Poly::h(3) * &x(3));
    }
}
