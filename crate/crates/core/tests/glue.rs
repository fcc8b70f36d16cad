mod common;

use common::{rng, rpoly};
use num_traits::ToPrimitive;
use orbitstar::coeff::{rat, Poly};
use orbitstar::glue::{
    apply_diffop, associativity_check, chart_agreement_check, chart_consistency_check, cocycle_check, continuity_check,
    load_fixture, parse_smooth, partition_check, partition_difference, random_function, tangentiality_probe, DiffOp,
    Evaluator, SmoothFunc, TOL_ASSOC, TOL_CHART, TOL_OPERATOR,
};
use orbitstar::glue::jet::JetSpace;

const CONSISTENT: [&str; 5] = ["single-chart", "two-chart", "three-chart", "foliated-r4", "foliated-r4-leak"];

fn to_smooth(f: &Poly) -> SmoothFunc {
    SmoothFunc::sum(f.terms().map(|(m, c)| {
        let c = c.constant_term().to_f64().unwrap();
        let factors = m.exponents().iter().enumerate().map(|(i, &e)| SmoothFunc::coord(i).pow(e));
        SmoothFunc::product(factors).scale(c)
    }))
}

#[test]
fn jets_of_integer_polynomials_are_exact() {
    let mut r = rng(4);
    for _ in 0..20 {
        let f = rpoly(&mut r, 3, 4);
        let sf = to_smooth(&f);
        for pt in [[1i64, -2, 3], [0, 2, -1], [-3, 1, 1]] {
            let x: Vec<f64> = pt.iter().map(|&v| v as f64).collect();
            let q: Vec<_> = pt.iter().map(|&v| rat(v)).collect();
            let jet = Evaluator::new(&x).jet(&sf, 5).unwrap();
            for a in JetSpace::get(3, 5).indices() {
                let exact = f.partial_multi(a).eval(&q).constant_term().to_f64().unwrap();
                assert_eq!(jet.derivative_value(a), exact, "{f} at {pt:?} d{a:?}");
            }
        }
    }
}

#[test]
fn symbolic_derivatives_agree_with_jets() {
    let f = parse_smooth("exp(x1*x2) * recip(2 + x1^2) + bump(x2/3)", 2).unwrap();
    let x = [0.3, -0.7];
    let jet = Evaluator::new(&x).jet(&f, 4).unwrap();
    for a in JetSpace::get(2, 2).indices() {
        let d = f.deriv(a);
        let v = Evaluator::new(&x).jet(&d, 2).unwrap().value();
        assert!((v - jet.derivative_value(a)).abs() < 1e-12, "{a:?}");
    }
}

fn sample_operator() -> DiffOp {
    let x1 = SmoothFunc::coord(0);
    let x2 = SmoothFunc::coord(1);
    let mut d = DiffOp::identity(2, 2);
    d.add_term(1, vec![1, 0], x2.clone());
    d.add_term(1, vec![0, 1], x1.mul(&x1).scale(0.5));
    d.add_term(2, vec![1, 1], x1.exp());
    d.add_term(2, vec![0, 0], x2.scale(-2.0));
    d
}

#[test]
fn inverse_composes_to_identity() {
    let d = sample_operator();
    let inv = d.invert().unwrap();
    let mut r = rng(8);
    for _ in 0..10 {
        let f = random_function(2, &mut r);
        let x = [0.4, -0.3];
        let v = apply_diffop(&inv.compose(&d), &f, &x).unwrap();
        let w = apply_diffop(&d.compose(&inv), &f, &x).unwrap();
        let f0 = f.eval(&x).unwrap();
        for (k, (a, b)) in v.iter().zip(&w).enumerate() {
            let want = if k == 0 { f0 } else { 0.0 };
            assert!((a - want).abs() < TOL_OPERATOR && (b - want).abs() < TOL_OPERATOR, "h^{k}: {a} {b}");
        }
    }
    assert!(DiffOp::zero(2, 2).invert().is_err());
}

#[test]
fn composition_is_associative() {
    let a = sample_operator();
    let b = DiffOp::exp_h(&DiffOp::vector_field(&[SmoothFunc::coord(1), SmoothFunc::constant(0.5)], 2));
    let c = a.invert().unwrap();
    let left = a.compose(&b).compose(&c);
    let right = a.compose(&b.compose(&c));
    let f = parse_smooth("x1^3*x2 + exp(x2)", 2).unwrap();
    for x in [[0.1, 0.2], [-1.0, 0.5]] {
        let u = apply_diffop(&left, &f, &x).unwrap();
        let v = apply_diffop(&right, &f, &x).unwrap();
        for (p, q) in u.iter().zip(&v) {
            assert!((p - q).abs() < TOL_OPERATOR);
        }
    }
}

#[test]
fn exp_of_a_constant_field_is_a_translation() {
    let t = DiffOp::exp_h(&DiffOp::vector_field(&[SmoothFunc::constant(1.0), SmoothFunc::zero()], 2));
    let f = parse_smooth("x1^4 + x1*x2", 2).unwrap();
    let v = apply_diffop(&t, &f, &[2.0, 3.0]).unwrap();
    // f(x1 + h, x2) = f + h (4 x1^3 + x2) + h^2 6 x1^2 + ...
    assert_eq!(v, vec![22.0, 35.0, 24.0]);
}

#[test]
fn consistent_fixtures_pass_every_check() {
    for name in CONSISTENT {
        let cover = load_fixture(name).unwrap();
        let mut r = rng(21);
        let reports = [
            partition_check(&cover, &mut r, 20).unwrap(),
            cocycle_check(&cover, &mut r, 20).unwrap(),
            chart_consistency_check(&cover, &mut r, 20).unwrap(),
            chart_agreement_check(&cover, &mut r, 20).unwrap(),
            associativity_check(&cover, &mut r, 20).unwrap(),
            continuity_check(&cover, &mut r, 20).unwrap(),
        ];
        for rep in reports {
            assert!(rep.pass, "{name}: {rep}");
        }
    }
}

#[test]
fn tolerances_are_ordered() {
    assert!(TOL_OPERATOR < TOL_CHART && TOL_CHART < TOL_ASSOC);
}

#[test]
fn perturbed_transition_breaks_the_cocycle() {
    let cover = load_fixture("three-chart-perturbed").unwrap();
    let mut r = rng(21);
    let co = cocycle_check(&cover, &mut r, 20).unwrap();
    assert!(!co.pass && co.max_defect() > 0.05, "{co}");
    assert!(!chart_consistency_check(&cover, &mut r, 20).unwrap().pass);
    assert!(associativity_check(&cover, &mut r, 20).unwrap().pass);
}

#[test]
fn leaf_probe_separates_tangent_and_transverse_flows() {
    for (name, want) in [("foliated-r4", true), ("foliated-r4-leak", false)] {
        let cover = load_fixture(name).unwrap();
        let leaf = cover.spec.leaf.clone().unwrap();
        let rep = tangentiality_probe(&cover, &leaf, &mut rng(3), 20).unwrap();
        assert_eq!(rep.pass, want, "{name}: {rep}");
        assert!(rep.samples > 0);
    }
}

#[test]
fn partition_choice_only_matters_beyond_first_order() {
    let cover = load_fixture("three-chart").unwrap();
    let d = partition_difference(&cover, &mut rng(6), 20).unwrap();
    assert!(d.samples > 0);
    assert!(d.per_order[0] < 1e-12 && d.per_order[1] < 1e-10, "{:?}", d.per_order);
}
