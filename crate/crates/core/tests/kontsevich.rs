mod common;

use common::{algebra, quantization, rng, rpoly, weyl};
use orbitstar::algstar::{equivalence_solver, EquivalenceConfig, StarP, Truncated};
use orbitstar::coeff::{ratio, Poly};
use orbitstar::kontsevich::{
    associativity_defects, default_test_polys, solve_order2_weights, standard_weights, KontsevichError,
    PoissonStructure, StarK2,
};
use proptest::prelude::*;
use std::sync::Arc;

fn structure(name: &str) -> PoissonStructure {
    PoissonStructure::from_lie(&algebra(name))
}

#[test]
fn weights_agree_across_test_sets() {
    let su2 = solve_order2_weights(&[(structure("su2"), default_test_polys(3, 2))]).unwrap();
    let plane = solve_order2_weights(&[(PoissonStructure::quadratic_plane(), default_test_polys(2, 3))]).unwrap();
    assert_eq!(su2, plane);
    assert_eq!(&su2, standard_weights());
    assert_eq!((su2.w_sym2.clone(), su2.w_loop.clone()), (ratio(1, 8), ratio(1, 12)));
}

#[test]
fn heisenberg_alone_leaves_the_loop_weight_free() {
    let r = solve_order2_weights(&[(structure("heisenberg"), default_test_polys(3, 2))]);
    assert_eq!(r, Err(KontsevichError::Underdetermined { rank: 1 }));
}

#[test]
fn bad_bivectors_are_rejected() {
    let x = |i| Poly::var(3, i);
    let z = Poly::zero(3);
    // not antisymmetric
    let a = vec![vec![z.clone(), x(2), z.clone()], vec![x(2), z.clone(), z.clone()], vec![z.clone(), z.clone(), z.clone()]];
    assert!(matches!(PoissonStructure::new(a), Err(KontsevichError::Antisymmetry { .. })));
    // {x1,x2} = x3, {x2,x3} = x2 breaks Jacobi
    let a = vec![
        vec![z.clone(), x(2), z.clone()],
        vec![-&x(2), z.clone(), x(1)],
        vec![z.clone(), -&x(1), z.clone()],
    ];
    assert!(matches!(PoissonStructure::new(a), Err(KontsevichError::Jacobi { .. })));
}

#[test]
fn first_order_is_half_the_bracket() {
    let p = PoissonStructure::quadratic_plane();
    let k2 = StarK2 { poisson: p.clone(), weights: standard_weights().clone() };
    let mut r = rng(9);
    for _ in 0..20 {
        let (f, g) = (rpoly(&mut r, 2, 3), rpoly(&mut r, 2, 3));
        let comm = &k2.star_k2(&f, &g) - &k2.star_k2(&g, &f);
        assert_eq!(comm.h_slice(1), p.bracket(&f, &g));
        assert!(comm.h_slice(0).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn associative_mod_h3(seed: u64, which in 0usize..4) {
        let p = match which {
            0 => structure("su2"),
            1 => structure("heisenberg"),
            2 => structure("su3"),
            _ => PoissonStructure::quadratic_plane(),
        };
        let n = p.n;
        let mut r = rng(seed);
        let d = if which == 2 { 2 } else { 3 };
        let (f, g, k) = (rpoly(&mut r, n, d), rpoly(&mut r, n, d), rpoly(&mut r, n, d));
        let (d1, d2) = associativity_defects(&p, standard_weights(), &f, &g, &k);
        prop_assert!(d1.is_zero() && d2.is_zero());
        let k2 = StarK2 { poisson: p, weights: standard_weights().clone() };
        let lhs = k2.star_k2(&k2.star_k2(&f, &g), &k);
        let rhs = k2.star_k2(&f, &k2.star_k2(&g, &k));
        prop_assert!((&lhs - &rhs).is_zero());
    }
}

#[test]
fn k2_is_equivalent_to_truncated_symmetrization() {
    let cfg = EquivalenceConfig { degree: 3, order: 2, derivation_degree: 1 };
    for name in ["su2", "heisenberg"] {
        let w = weyl(name);
        let k2 = StarK2 { poisson: structure(name), weights: standard_weights().clone() };
        let s = Truncated { inner: &w, order: 2 };
        assert!(equivalence_solver(&k2, &s, cfg).is_ok(), "{name}");
    }
}

#[test]
fn p_is_equivalent_to_symmetrization() {
    let q = Arc::new(quantization("su2", None));
    let p = StarP(q.clone());
    let cfg = EquivalenceConfig { degree: 3, order: 2, derivation_degree: 1 };
    let eq = equivalence_solver(&p, q.weyl().as_ref(), cfg).unwrap();
    let mut r = rng(1);
    for _ in 0..10 {
        let (f, g) = (rpoly(&mut r, 3, 3), rpoly(&mut r, 3, 3));
        let lhs = eq.apply(&p.0.star_p(&f, &g)).truncate_h(2);
        let rhs = q.weyl().star_s(&eq.apply(&f), &eq.apply(&g)).truncate_h(2);
        assert_eq!(lhs, rhs);
    }
}
