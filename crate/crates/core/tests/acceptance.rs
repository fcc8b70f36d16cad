//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{
    algebra, lift_qp, moyal_oracle, quantization, rng, rpoly, sym_by_permutations, weyl,
};
use orbitstar::algstar::{
    compute_delta, equivalence_solver, tangentiality_check, EquivalenceConfig, GeneratorShift, QuantizationData,
    StarP, StarProduct, Truncated,
};
use orbitstar::coeff::{rat, ratio, HPoly, Monomial, Poly, Rational};
use orbitstar::glue::{
    associativity_check, chart_consistency_check, cocycle_check, continuity_check, load_fixture, tangentiality_probe,
    GlueReport,
};
use orbitstar::kontsevich::{
    default_test_polys, solve_order2_weights, standard_weights, KontsevichError, PoissonStructure, StarK2,
};
use orbitstar::lie::{catalog_source, load_algebra};
use orbitstar::orbit::OrbitIdeal;
use orbitstar::pbw::{EnvelopingAlgebra, PBWElement, Word};
use orbitstar::weyl::{restrict_heisenberg_moyal, Weyl};

const TOL_COCYCLE: f64 = 1e-10;
const TOL_CONSISTENCY: f64 = 1e-10;
const TOL_GLUED_ASSOC: f64 = 1e-8;
const TOL_CONTINUITY: f64 = 1e-9;
const GLUE_POINTS: usize = 20;
const SUITE_BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn element(f: &Poly) -> PBWElement {
    let mut u = PBWElement::zero();
    for (m, c) in f.terms() {
        u.add_term(Word::from_monomial(m), c);
    }
    u
}

fn with_c0(name: &str, c0: Vec<Rational>, c_h: Option<Vec<HPoly>>) -> QuantizationData {
    let a = algebra(name);
    let w = Arc::new(Weyl::for_algebra(a.clone()));
    let o = Arc::new(OrbitIdeal::new(a, c0).unwrap());
    QuantizationData::new(w, o, c_h).unwrap()
}

fn algebra_validation() -> Outcome {
    for name in ["heisenberg", "su2", "su3"] {
        let a = load_algebra(catalog_source(name).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        ensure(a.antisymmetry_report().is_empty(), || format!("{name} antisymmetry"))?;
        ensure(a.jacobi_report().is_empty(), || format!("{name} Jacobi"))?;
        ensure(a.centrality_report().is_empty(), || format!("{name} centrality"))?;
    }
    let su2 = catalog_source("su2").unwrap();
    let su3 = catalog_source("su3").unwrap();
    let corrupted = [
        ("flipped sign", su2.replace(r#"brackets = ["1 2 -> 3 1","#, r#"brackets = ["1 2 -> 3 1", "2 1 -> 3 1","#)),
        ("broken Jacobi", su3.replace("\"2 8 -> 5 -3\"", "\"2 8 -> 5 -2\"")),
        ("non-central invariant", su2.replace("x1^2 + x2^2 + x3^2", "x1^2 + x2^2")),
    ];
    for (what, src) in &corrupted {
        ensure(load_algebra(src).is_err(), || format!("{what} accepted"))?;
    }
    Ok("3 catalog algebras valid, 3 corrupted documents rejected".into())
}

fn pbw_associativity() -> Outcome {
    let mut r = rng(1002);
    for name in ["heisenberg", "su2", "su3"] {
        let a = algebra(name);
        let ua = EnvelopingAlgebra::new(a.clone());
        for t in 0..100 {
            let x = element(&rpoly(&mut r, a.dim, 3));
            let y = element(&rpoly(&mut r, a.dim, 3));
            let z = element(&rpoly(&mut r, a.dim, 3));
            ensure(ua.mul(&ua.mul(&x, &y), &z) == ua.mul(&x, &ua.mul(&y, &z)), || format!("{name} triple {t}"))?;
        }
    }
    Ok("300 triples exact".into())
}

fn sym_round_trip() -> Outcome {
    let mut count = 0;
    for (name, d) in [("su2", 5), ("heisenberg", 5), ("su3", 3)] {
        let w = weyl(name);
        for m in Monomial::all_up_to_degree(w.nvars(), d) {
            let f = Poly::term(m.clone(), HPoly::one());
            ensure(w.sym_inv(&w.sym(&f)) == f, || format!("{name} {f}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} monomials"))
}

fn star_s_axioms() -> Outcome {
    let mut r = rng(1004);
    for (name, cases) in [("su2", 100), ("heisenberg", 100), ("su3", 20)] {
        let w = weyl(name);
        let n = w.nvars();
        let one = Poly::one(n);
        for t in 0..cases {
            let (f, g, k) = (rpoly(&mut r, n, 3), rpoly(&mut r, n, 3), rpoly(&mut r, n, 3));
            let fg = w.star_s(&f, &g);
            ensure(w.star_s(&fg, &k) == w.star_s(&f, &w.star_s(&g, &k)), || format!("{name} assoc {t}"))?;
            ensure(w.star_s(&f, &one) == f && w.star_s(&one, &f) == f, || format!("{name} unit {t}"))?;
            let comm = &fg - &w.star_s(&g, &f);
            let bracket = w.algebra().poisson_bracket(&f, &g).unwrap();
            ensure(fg.h_slice(0) == &f * &g, || format!("{name} classical limit {t}"))?;
            ensure(comm.h_slice(0).is_zero() && comm.h_slice(1) == bracket, || format!("{name} first order {t}"))?;
        }
    }
    Ok("assoc/unit/first-order on 220 triples".into())
}

fn heisenberg_moyal() -> Outcome {
    let a = algebra("heisenberg");
    let w = weyl("heisenberg");
    let mons = Monomial::all_up_to_degree(2, 4);
    let mut r = rng(1005);
    let sample: Vec<Poly> = (0..20).map(|_| rpoly(&mut r, 3, 3)).collect();
    let mut pairs = 0;
    for c in [rat(1), rat(2), rat(-1)] {
        let o = OrbitIdeal::new(a.clone(), vec![c.clone()]).unwrap();
        ensure(tangentiality_check(&w, &o, &sample).pass, || format!("not tangential at c={c}"))?;
        for p in &mons {
            for q in &mons {
                let f = Poly::term(p.clone(), HPoly::one());
                let g = Poly::term(q.clone(), HPoly::one());
                let got = restrict_heisenberg_moyal(&w, &lift_qp(&f), &lift_qp(&g), &c).unwrap();
                ensure(got == moyal_oracle(&f, &g, &c), || format!("c={c}: {f} * {g}"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("tangential, {pairs} restricted products match"))
}

fn su2_witness() -> Outcome {
    let a = algebra("su2");
    let w = weyl("su2");
    let o = OrbitIdeal::new(a, vec![rat(1)]).unwrap();
    let x = Poly::var(3, 0);
    let ua = w.ua();
    let sym = |f: &Poly| {
        let mut u = PBWElement::zero();
        for (m, c) in f.terms() {
            u.add_scaled(&sym_by_permutations(ua, m), c);
        }
        u
    };
    let mut rest = ua.mul(&sym(&o.generators()[0]), &sym(&x));
    let mut prod = Poly::zero(3);
    while let Some(d) = rest.degree() {
        let top = rest.part_of_degree(d).symbol(3);
        rest = &rest - &sym(&top);
        prod += &top;
    }
    let oracle = o.normal_form(&prod);
    let mu = oracle.coeff(&Monomial::var(3, 0)).coeff(2);
    ensure(oracle == &Poly::constant(3, HPoly::monomial(mu.clone(), 2)) * &x, || format!("oracle residue {oracle}"))?;
    ensure(mu == ratio(-1, 3), || format!("mu = {mu}"))?;
    let rep = tangentiality_check(&w, &o, &[x.clone()]);
    ensure(!rep.pass, || "reported tangential".into())?;
    let wit = rep.witness.unwrap();
    ensure(wit.residue == oracle, || format!("witness {} differs from oracle {oracle}", wit.residue))?;
    let names = algebra("su2").var_names();
    println!("#   witness: (p-c)*x|p=c = {}", names.format(&wit.residue));
    Ok(format!("mu = {mu}"))
}

fn star_p_checks() -> Outcome {
    let mut r = rng(1007);
    for name in ["su2", "su3"] {
        let q = quantization(name, None);
        let n = q.nvars();
        for t in 0..50 {
            let f = rpoly(&mut r, n, 3);
            for p in &q.ideal().algebra().invariants {
                ensure(q.star_p(&f, p) == &f * p, || format!("{name} f*p case {t}"))?;
            }
        }
    }
    let q = quantization("su2", None);
    for t in 0..100 {
        let (f, g, k) = (rpoly(&mut r, 3, 3), rpoly(&mut r, 3, 3), rpoly(&mut r, 3, 3));
        ensure(q.star_p(&q.star_p(&f, &g), &k) == q.star_p(&f, &q.star_p(&g, &k)), || format!("assoc {t}"))?;
    }
    let o = q.ideal();
    let g0 = &o.generators()[0];
    for t in 0..50 {
        let (f, g, k) = (rpoly(&mut r, 3, 3), rpoly(&mut r, 3, 3), rpoly(&mut r, 3, 3));
        let (a, b) = (rpoly(&mut r, 3, 2), rpoly(&mut r, 3, 2));
        let (nf, ng, nk) = (o.normal_form(&f), o.normal_form(&g), o.normal_form(&k));
        let direct = q.star_p_orbit(&nf, &ng).map_err(|e| e.to_string())?;
        let shifted = o.normal_form(&q.star_p(&(&f + &(&a * g0)), &(&g + &(&b * g0))));
        ensure(direct == shifted, || format!("representative dependence {t}"))?;
        let left = q.star_p_orbit(&direct, &nk).map_err(|e| e.to_string())?;
        let right = q.star_p_orbit(&nf, &q.star_p_orbit(&ng, &nk).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(left == right, || format!("orbit assoc {t}"))?;
    }
    Ok("invariants multiply, 100 assoc triples, 50 orbit cases".into())
}

fn eta_checks() -> Outcome {
    let c0 = rat(1);
    let variants = [
        HPoly::constant(c0.clone()),
        HPoly::from_coeffs(vec![c0.clone(), rat(1)]),
        HPoly::from_coeffs(vec![c0.clone(), rat(0), ratio(1, 3)]),
    ];
    let mut r = rng(1008);
    for ch in variants {
        let q = with_c0("su2", vec![c0.clone()], Some(vec![ch.clone()]));
        let p = q.ideal().algebra().invariants[0].clone();
        let g = &p - &Poly::from_rational(3, c0.clone());
        ensure(q.eta(&g) == &p - &Poly::constant(3, ch.clone()), || format!("generator at c(h) = {ch}"))?;
        let w = q.weyl();
        for t in 0..50 {
            let (f, g) = (rpoly(&mut r, 3, 4), rpoly(&mut r, 3, 4));
            let lhs = q.eta(&q.star_p(&f, &g));
            ensure(lhs == w.star_s(&q.eta(&f), &q.eta(&g)), || format!("homomorphism c(h) = {ch}, pair {t}"))?;
        }
    }
    Ok("3 deformations, 150 pairs".into())
}

fn delta_checks() -> Outcome {
    let y = |m: usize, j: usize| Poly::var(m, j);
    let cst = |m: usize, c: i64| Poly::from_rational(m, rat(c));
    let h1 = Poly::h(1);
    let h2 = Poly::h(2);
    let fixtures: Vec<(QuantizationData, Vec<Poly>, Vec<HPoly>, bool)> = vec![
        (
            with_c0("su2", vec![rat(1)], Some(vec![HPoly::from_coeffs(vec![rat(1), rat(2), rat(1)])])),
            vec![&(&(&y(1, 0) - &cst(1, 1)).pow(2) + &cst(1, 2)) + &(&h1 * &y(1, 0))],
            vec![HPoly::from_coeffs(vec![rat(2), rat(1)])],
            true,
        ),
        (
            with_c0("su2", vec![rat(3)], None),
            vec![&h1.pow(2) * &y(1, 0).pow(3)],
            vec![HPoly::monomial(rat(27), 2)],
            false,
        ),
        (
            with_c0(
                "su3",
                vec![rat(4), rat(-16)],
                Some(vec![HPoly::from_coeffs(vec![rat(4), rat(3)]), HPoly::from_coeffs(vec![rat(-16), rat(0), rat(1)])]),
            ),
            vec![&cst(2, 19) + &y(2, 1), &h2 + &(&(&y(2, 0) - &cst(2, 4)) * &y(2, 1))],
            vec![HPoly::constant(rat(3)), HPoly::h()],
            true,
        ),
    ];
    for (k, (q, z, want, matches)) in fixtures.iter().enumerate() {
        let rep = compute_delta(q, &GeneratorShift { z: z.clone() }).map_err(|e| e.to_string())?;
        ensure(&rep.delta == want, || format!("fixture {k}: delta {:?}", rep.delta))?;
        let c0 = q.ideal().c0();
        let m = c0.len();
        for (i, zi) in z.iter().enumerate() {
            let mut rebuilt = Poly::constant(m, rep.delta[i].clone());
            for (j, bij) in rep.b[i].iter().enumerate() {
                rebuilt += &(bij * &(&y(m, j) - &Poly::from_rational(m, c0[j].clone())));
            }
            ensure(&rebuilt == zi, || format!("fixture {k}: witness row {i} does not rebuild z"))?;
        }
        ensure(rep.factorization_holds, || format!("fixture {k}: factorization"))?;
        ensure(rep.invertible_at_zero && rep.det.h_slice(0) == Poly::one(m), || format!("fixture {k}: det at h=0"))?;
        ensure(rep.matches_quantization == *matches, || format!("fixture {k}: quantization match"))?;
    }
    Ok("3 shifts reproduced".into())
}

fn check_equivalence(a: &dyn StarProduct, b: &dyn StarProduct, label: &str) -> Result<(), String> {
    let cfg = EquivalenceConfig { degree: 3, order: 2, derivation_degree: 1 };
    let eq = equivalence_solver(a, b, cfg).map_err(|e| format!("{label}: {e}"))?;
    let n = a.nvars();
    let mut r = rng(1010);
    for t in 0..10 {
        let (f, g) = (rpoly(&mut r, n, 3), rpoly(&mut r, n, 3));
        let lhs = eq.apply(&a.star(&f, &g)).truncate_h(2);
        let rhs = b.star(&eq.apply(&f), &eq.apply(&g)).truncate_h(2);
        ensure(lhs == rhs, || format!("{label}: intertwining fails on pair {t}"))?;
    }
    Ok(())
}

fn equivalences() -> Outcome {
    let q = Arc::new(quantization("su2", None));
    check_equivalence(&StarP(q.clone()), q.weyl().as_ref(), "P vs S on su2")?;
    for name in ["su2", "heisenberg"] {
        let w = weyl(name);
        let k2 = StarK2 { poisson: PoissonStructure::from_lie(&w.algebra().clone()), weights: standard_weights().clone() };
        check_equivalence(&k2, &Truncated { inner: &w, order: 2 }, &format!("K2 vs S on {name}"))?;
    }
    Ok("3 equivalences at d=3, r=2".into())
}

fn kontsevich_order2() -> Outcome {
    let lie = |n: &str| PoissonStructure::from_lie(&algebra(n));
    let su2 = solve_order2_weights(&[(lie("su2"), default_test_polys(3, 2))]).map_err(|e| e.to_string())?;
    let both = solve_order2_weights(&[(lie("su2"), default_test_polys(3, 2)), (lie("heisenberg"), default_test_polys(3, 3))])
        .map_err(|e| e.to_string())?;
    let plane = solve_order2_weights(&[(PoissonStructure::quadratic_plane(), default_test_polys(2, 3))])
        .map_err(|e| e.to_string())?;
    ensure(su2 == both && su2 == plane && &su2 == standard_weights(), || "weights differ across test sets".into())?;
    let heis = solve_order2_weights(&[(lie("heisenberg"), default_test_polys(3, 2))]);
    ensure(matches!(heis, Err(KontsevichError::Underdetermined { rank: 1 })), || "heisenberg alone".into())?;
    let structures = [lie("su2"), lie("heisenberg"), PoissonStructure::quadratic_plane()];
    let mut r = rng(1011);
    for t in 0..100 {
        let p = structures[t % 3].clone();
        let n = p.n;
        let k2 = StarK2 { poisson: p, weights: su2.clone() };
        let (f, g, k) = (rpoly(&mut r, n, 3), rpoly(&mut r, n, 3), rpoly(&mut r, n, 3));
        let lhs = k2.star_k2(&k2.star_k2(&f, &g), &k);
        let rhs = k2.star_k2(&f, &k2.star_k2(&g, &k));
        ensure(lhs == rhs, || format!("triple {t} on structure {}", t % 3))?;
    }
    Ok(format!("weights ({}, {}), 100 triples", su2.w_sym2, su2.w_loop))
}

fn worst(rep: &GlueReport) -> f64 {
    rep.max_defect()
}

fn gluing() -> Outcome {
    let mut lines = Vec::new();
    for name in ["two-chart", "three-chart"] {
        let cover = load_fixture(name).map_err(|e| e.to_string())?;
        let mut r = rng(1012);
        let co = cocycle_check(&cover, &mut r, GLUE_POINTS).map_err(|e| e.to_string())?;
        let cc = chart_consistency_check(&cover, &mut r, GLUE_POINTS).map_err(|e| e.to_string())?;
        let asc = associativity_check(&cover, &mut r, GLUE_POINTS).map_err(|e| e.to_string())?;
        let ct = continuity_check(&cover, &mut r, GLUE_POINTS).map_err(|e| e.to_string())?;
        ensure(co.samples > 0 && worst(&co) < TOL_COCYCLE, || format!("{name}: {co}"))?;
        ensure(cc.samples > 0 && worst(&cc) < TOL_CONSISTENCY, || format!("{name}: {cc}"))?;
        ensure(asc.samples >= GLUE_POINTS && asc.defects.iter().all(|d| *d < TOL_GLUED_ASSOC), || format!("{name}: {asc}"))?;
        ensure(ct.samples > 0 && worst(&ct) < TOL_CONTINUITY, || format!("{name}: {ct}"))?;
        lines.push(format!(
            "{name} cocycle {:.1e} consistency {:.1e} assoc {:.1e} continuity {:.1e}",
            worst(&co),
            worst(&cc),
            worst(&asc),
            worst(&ct)
        ));
    }
    for (name, want) in [("foliated-r4", true), ("foliated-r4-leak", false)] {
        let cover = load_fixture(name).map_err(|e| e.to_string())?;
        let leaf = cover.spec.leaf.clone().ok_or("fixture has no leaf")?;
        let rep = tangentiality_probe(&cover, &leaf, &mut rng(1012), GLUE_POINTS).map_err(|e| e.to_string())?;
        ensure(rep.samples > 0 && rep.pass == want, || format!("{name}: {rep}"))?;
    }
    Ok(lines.join("; ") + "; leaf probe separates the foliated fixtures")
}

struct Criterion {
    id: u32,
    name: &'static str,
    run: fn() -> Outcome,
    budget: Option<Duration>,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "algebra validation", run: algebra_validation, budget: Some(Duration::from_secs(1)) },
        Criterion { id: 2, name: "PBW associativity", run: pbw_associativity, budget: Some(Duration::from_secs(30)) },
        Criterion { id: 3, name: "Sym round-trip", run: sym_round_trip, budget: None },
        Criterion { id: 4, name: "symmetrized product axioms", run: star_s_axioms, budget: None },
        Criterion { id: 5, name: "Heisenberg-Moyal", run: heisenberg_moyal, budget: None },
        Criterion { id: 6, name: "su2 non-tangentiality", run: su2_witness, budget: None },
        Criterion { id: 7, name: "orbit-adapted product", run: star_p_checks, budget: None },
        Criterion { id: 8, name: "eta", run: eta_checks, budget: None },
        Criterion { id: 9, name: "delta machinery", run: delta_checks, budget: None },
        Criterion { id: 10, name: "equivalence", run: equivalences, budget: None },
        Criterion { id: 11, name: "order-2 Kontsevich", run: kontsevich_order2, budget: None },
        Criterion { id: 12, name: "gluing", run: gluing, budget: None },
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let start = Instant::now();
    let mut failed = 0;
    for c in &criteria {
        let t0 = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let dt = t0.elapsed();
        let res = match (res, c.budget) {
            (Ok(_), Some(b)) if dt > b => Err(format!("took {dt:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        match res {
            Ok(detail) => println!("criterion {:>2} {:<28} PASS  {detail} ({dt:.2?})", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {:<28} FAIL  {why} ({dt:.2?})", c.id, c.name);
            }
        }
    }
    let total = start.elapsed();
    if total < SUITE_BUDGET {
        println!("criterion 13 {:<28} PASS  {total:.2?} single-threaded", "suite runtime");
    } else {
        failed += 1;
        println!("criterion 13 {:<28} FAIL  {total:.2?} exceeds {SUITE_BUDGET:?}", "suite runtime");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
