//! Command-line surface.
//!
//! Reports are tab-separated `PROPERTY\tSTATUS\tWITNESS` lines after a
//! `#` header carrying the seed. Exit codes: 0 pass, 1 property failure,
//! 2 usage or parse error.

use std::fmt::Write as _;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algstar::{
    classical_limit_ok, equivalence_solver, h_order_at_least, tangentiality_check, EquivalenceConfig, QuantizationData,
    Side, StarP, StarProduct, Truncated,
};
use crate::coeff::{HPoly, Monomial, Poly, Rational};
use crate::expr::{parse_expr, VarNames};
use crate::glue;
use crate::kontsevich::{standard_weights, PoissonStructure, StarK2};
use crate::lie::{catalog, catalog_source, LieAlgebra, LieError};
use crate::orbit::OrbitIdeal;
use crate::sample::random_poly;
use crate::weyl::Weyl;

pub const SEED_ENV: &str = "ORBITSTAR_SEED";

#[derive(Parser, Debug)]
#[command(name = "orbitstar", version, about = "Star products on duals of Lie algebras and their coadjoint orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check antisymmetry, Jacobi and centrality of the invariants.
    CheckAlgebra {
        /// Catalog name or path to an algebra file.
        algebra: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Multiply two polynomials.
    StarMul {
        #[arg(long, value_enum)]
        product: ProductKind,
        #[arg(long, default_value = "su2")]
        algebra: String,
        /// Orbit constants, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        c0: Option<String>,
        /// Deformed constants c_i(h), comma separated.
        #[arg(long, allow_hyphen_values = true)]
        ch: Option<String>,
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
    },
    /// Normal form modulo the orbit ideal.
    OrbitReduce {
        #[arg(long, default_value = "su2")]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        c0: Option<String>,
        #[arg(allow_hyphen_values = true)]
        f: String,
    },
    /// Run a seeded property suite.
    Verify {
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long, value_enum, default_value = "s")]
        product: ProductKind,
        #[arg(long, default_value = "su2")]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        c0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        ch: Option<String>,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 20)]
        cases: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Numerical checks of a glued product on a chart cover.
    GlueVerify {
        /// Built-in fixture name or path to a fixture file.
        #[arg(long)]
        fixture: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "cocycle,consistency,assoc")]
        check: Vec<GlueCheck>,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProductKind {
    #[value(name = "S", alias = "s")]
    S,
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "K2", alias = "k2")]
    K2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Property {
    Assoc,
    Tangential,
    Equivalence,
    EtaGenerators,
    FirstOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GlueCheck {
    Partition,
    Cocycle,
    Consistency,
    Agreement,
    Assoc,
    Continuity,
    Tangential,
}

/// Usage errors carry exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = Result<(i32, String), Usage>;

/// Run one command line (without the program name) and return the exit code
/// and everything that would be printed.
pub fn run_command<S: AsRef<str>>(argv: &[S]) -> (i32, String) {
    let args = std::iter::once("orbitstar").chain(argv.iter().map(AsRef::as_ref));
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, e.render().to_string());
        }
    };
    match dispatch(cli.command) {
        Ok(r) => r,
        Err(Usage(msg)) => (2, format!("error: {msg}\n")),
    }
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Usage> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn load_algebra_arg(name: &str) -> Result<LieAlgebra, Usage> {
    if catalog_source(name).is_some() {
        return Ok(catalog(name)?);
    }
    let src = std::fs::read_to_string(name).map_err(|e| Usage(format!("no catalog algebra or readable file {name:?}: {e}")))?;
    Ok(crate::lie::load_algebra(&src)?)
}

fn parse_h_series(src: &str) -> Result<HPoly, Usage> {
    let p = parse_expr(src.trim(), &VarNames::plain(0)).map_err(|e| Usage(format!("{src:?}: {e}")))?;
    Ok(p.coeff(&Monomial::one(0)))
}

fn parse_list(src: &str, rank: usize, what: &str, allow_h: bool) -> Result<Vec<HPoly>, Usage> {
    let vals = src.split(',').map(parse_h_series).collect::<Result<Vec<_>, _>>()?;
    if vals.len() != rank {
        return Err(Usage(format!("{what} needs {rank} value(s), got {}", vals.len())));
    }
    if !allow_h && vals.iter().any(|v| !v.is_constant()) {
        return Err(Usage(format!("{what} must not depend on h")));
    }
    Ok(vals)
}

fn orbit_constants(a: &LieAlgebra, c0: Option<&str>) -> Result<Vec<Rational>, Usage> {
    match c0 {
        Some(s) => Ok(parse_list(s, a.rank(), "--c0", false)?.iter().map(HPoly::constant_term).collect()),
        None => a
            .regular_constants()
            .next()
            .map(<[Rational]>::to_vec)
            .ok_or_else(|| Usage(format!("{} has no catalog orbit; pass --c0", a.name))),
    }
}

struct Setup {
    names: VarNames,
    weyl: Arc<Weyl>,
    ideal: Option<Arc<OrbitIdeal>>,
    star_p: Option<StarP>,
    k2: Option<StarK2>,
    kind: ProductKind,
}

impl Setup {
    fn new(algebra: &str, kind: ProductKind, c0: Option<&str>, ch: Option<&str>, need_ideal: bool) -> Result<Setup, Usage> {
        let a = Arc::new(load_algebra_arg(algebra)?);
        let names = a.var_names();
        let weyl = Arc::new(Weyl::for_algebra(a.clone()));
        let mut ideal = None;
        if need_ideal || kind == ProductKind::P || c0.is_some() {
            let c = orbit_constants(&a, c0)?;
            ideal = Some(Arc::new(OrbitIdeal::new(a.clone(), c)?));
        }
        let mut star_p = None;
        if kind == ProductKind::P {
            let c_h = ch.map(|s| parse_list(s, a.rank(), "--ch", true)).transpose()?;
            let q = QuantizationData::new(weyl.clone(), ideal.clone().unwrap(), c_h)?;
            star_p = Some(StarP(Arc::new(q)));
        } else if ch.is_some() {
            return Err(Usage("--ch only applies to --product P".into()));
        }
        let k2 = (kind == ProductKind::K2)
            .then(|| StarK2 { poisson: PoissonStructure::from_lie(&a), weights: standard_weights().clone() });
        Ok(Setup { names, weyl, ideal, star_p, k2, kind })
    }

    fn star(&self) -> &dyn StarProduct {
        match self.kind {
            ProductKind::S => self.weyl.as_ref(),
            ProductKind::P => self.star_p.as_ref().unwrap(),
            ProductKind::K2 => self.k2.as_ref().unwrap(),
        }
    }

    fn parse(&self, src: &str) -> Result<Poly, Usage> {
        parse_expr(src, &self.names).map_err(|e| Usage(format!("{src:?}: {e}")))
    }

    fn fmt(&self, p: &Poly) -> String {
        self.names.format(p)
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::CheckAlgebra { algebra, seed } => check_algebra(&algebra, resolve_seed(seed)?),
        Command::StarMul { product, algebra, c0, ch, f, g } => {
            let s = Setup::new(&algebra, product, c0.as_deref(), ch.as_deref(), false)?;
            let (f, g) = (s.parse(&f)?, s.parse(&g)?);
            Ok((0, format!("{}\n", s.fmt(&s.star().star(&f, &g)))))
        }
        Command::OrbitReduce { algebra, c0, f } => {
            let s = Setup::new(&algebra, ProductKind::S, c0.as_deref(), None, true)?;
            let f = s.parse(&f)?;
            Ok((0, format!("{}\n", s.fmt(&s.ideal.as_ref().unwrap().normal_form(&f)))))
        }
        Command::Verify { property, product, algebra, c0, ch, degree, order, cases, seed } => {
            let seed = resolve_seed(seed)?;
            let need_ideal = property == Property::Tangential;
            let s = Setup::new(&algebra, product, c0.as_deref(), ch.as_deref(), need_ideal)?;
            let (pname, kname) = (value_name(property), value_name(product));
            let mut out = format!("# verify property={pname} product={kname} algebra={algebra} seed={seed}\n");
            let pass = verify(&s, property, degree, order, cases, seed, &mut out)?;
            Ok((i32::from(!pass), out))
        }
        Command::GlueVerify { fixture, check, points, seed } => glue_verify(&fixture, &check, points, resolve_seed(seed)?),
    }
}

fn value_name<V: ValueEnum>(v: V) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn line(out: &mut String, prop: &str, pass: bool, witness: &str) {
    let _ = writeln!(out, "{prop}\t{}\t{witness}", if pass { "PASS" } else { "FAIL" });
}

fn check_algebra(name: &str, seed: u64) -> Outcome {
    let src = match catalog_source(name) {
        Some(s) => s.to_string(),
        None => std::fs::read_to_string(name).map_err(|e| Usage(format!("no catalog algebra or readable file {name:?}: {e}")))?,
    };
    let a = match LieAlgebra::parse_unchecked(&src) {
        Ok(a) => a,
        Err(e @ LieError::Antisymmetry { .. }) => {
            let mut out = format!("# check-algebra {name} seed={seed}\n");
            line(&mut out, "antisymmetry", false, &e.to_string());
            return Ok((1, out));
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = format!("# check-algebra {} seed={seed}\n", a.name);
    let anti = a.antisymmetry_report();
    let jac = a.jacobi_report();
    let cent = a.centrality_report();
    let w = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    line(&mut out, "antisymmetry", anti.is_empty(), &w(anti.first().map(|(i, j, k)| format!("c_{i}{j}^{k} != -c_{j}{i}^{k}"))));
    line(&mut out, "jacobi", jac.is_empty(), &w(jac.first().map(|(i, j, k, m)| format!("({i},{j},{k}) component {m}"))));
    line(
        &mut out,
        "centrality",
        cent.is_empty(),
        &w(cent.first().map(|(p, v)| format!("{{p{p}, x{v}}} != 0"))),
    );
    let pass = anti.is_empty() && jac.is_empty() && cent.is_empty();
    Ok((i32::from(!pass), out))
}

fn verify(s: &Setup, prop: Property, degree: u32, order: usize, cases: usize, seed: u64, out: &mut String) -> Result<bool, Usage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = s.names.nvars;
    let star = s.star();
    let name = value_name(prop);
    match prop {
        Property::Assoc => {
            for case in 0..cases {
                let [f, g, k] = [(); 3].map(|_| random_poly(&mut rng, n, degree, 3, 3));
                let lhs = star.star(&star.star(&f, &g), &k);
                let rhs = star.star(&f, &star.star(&g, &k));
                if lhs != rhs {
                    let _ = writeln!(out, "# case {case}: f = {}, g = {}, k = {}", s.fmt(&f), s.fmt(&g), s.fmt(&k));
                    line(out, &name, false, &s.fmt(&(&lhs - &rhs)));
                    return Ok(false);
                }
            }
            line(out, &name, true, &format!("{cases} triples"));
        }
        Property::Tangential => {
            let ideal = s.ideal.as_ref().unwrap();
            let mut sample: Vec<Poly> = Monomial::all_up_to_degree(n, degree)
                .into_iter()
                .filter(|m| !m.is_one())
                .map(|m| Poly::term(m, HPoly::one()))
                .collect();
            sample.extend((0..cases).map(|_| random_poly(&mut rng, n, degree, 3, 3)));
            let rep = tangentiality_check(star, ideal, &sample);
            match rep.witness {
                Some(w) => {
                    let gen = s.fmt(&ideal.generators()[w.generator]);
                    let expr = match w.side {
                        Side::Left => format!("({gen}) * {}", s.fmt(&w.f)),
                        Side::Right => format!("{} * ({gen})", s.fmt(&w.f)),
                    };
                    let _ = writeln!(out, "# {expr} reduces to the witness on the orbit");
                    line(out, &name, false, &s.fmt(&w.residue));
                }
                None => line(out, &name, true, &format!("{} products", rep.checked)),
            }
            return Ok(rep.pass);
        }
        Property::Equivalence => {
            let cfg = EquivalenceConfig { degree, order, derivation_degree: 1 };
            let reference = Truncated { inner: s.weyl.as_ref(), order };
            match equivalence_solver(star, &reference, cfg) {
                Ok(e) => line(out, &name, true, &format!("{} pairs to S, d={degree} r={order}", e.pairs_checked)),
                Err(e) => {
                    let _ = writeln!(out, "# {e}");
                    line(out, &name, false, &equivalence_witness(s, &e));
                    return Ok(false);
                }
            }
        }
        Property::EtaGenerators => {
            let q = &s.star_p.as_ref().ok_or_else(|| Usage("eta-generators needs --product P".into()))?.0;
            let ideal = q.ideal();
            for (i, gen) in ideal.generators().iter().enumerate() {
                let p = &ideal.algebra().invariants[i];
                let want = p - &Poly::constant(n, q.c_h()[i].clone());
                let got = q.eta(gen);
                if got != want {
                    let _ = writeln!(out, "# generator {}", i + 1);
                    line(out, &name, false, &s.fmt(&(&got - &want)));
                    return Ok(false);
                }
            }
            line(out, &name, true, &format!("{} generators", ideal.generators().len()));
        }
        Property::FirstOrder => {
            let a = s.weyl.algebra();
            for case in 0..cases {
                let [f, g] = [(); 2].map(|_| random_poly(&mut rng, n, degree, 3, 3));
                let comm = &star.star(&f, &g) - &star.star(&g, &f);
                let br = a.poisson_bracket(&f, &g)?.shift_h(1);
                let defect = &comm - &br;
                if !classical_limit_ok(star, &f, &g) || !h_order_at_least(&defect, 2) {
                    let _ = writeln!(out, "# case {case}: f = {}, g = {}", s.fmt(&f), s.fmt(&g));
                    line(out, &name, false, &s.fmt(&defect.truncate_h(1)));
                    return Ok(false);
                }
            }
            line(out, &name, true, &format!("{cases} pairs"));
        }
    }
    Ok(true)
}

fn equivalence_witness(s: &Setup, e: &crate::algstar::EquivalenceError) -> String {
    use crate::algstar::EquivalenceError as E;
    match e {
        E::NotEquivalent { residual, .. } | E::NotCoboundary { residual, .. } | E::Residual { residual, .. } => s.fmt(residual),
        E::VarCount(..) => e.to_string(),
    }
}

fn glue_verify(fixture: &str, checks: &[GlueCheck], points: usize, seed: u64) -> Outcome {
    let cover = glue::load_fixture(fixture)?;
    let mut out = format!("# glue-verify fixture={} seed={seed} points={points}\n", cover.spec.name);
    let mut pass = true;
    for check in checks {
        // one stream per check kind, so the order of --check does not matter
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (*check as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let rep = match check {
            GlueCheck::Partition => glue::partition_check(&cover, &mut rng, points)?,
            GlueCheck::Cocycle => glue::cocycle_check(&cover, &mut rng, points)?,
            GlueCheck::Consistency => glue::chart_consistency_check(&cover, &mut rng, points)?,
            GlueCheck::Agreement => glue::chart_agreement_check(&cover, &mut rng, points)?,
            GlueCheck::Assoc => glue::associativity_check(&cover, &mut rng, points)?,
            GlueCheck::Continuity => glue::continuity_check(&cover, &mut rng, points)?,
            GlueCheck::Tangential => {
                let leaf = cover.spec.leaf.clone().ok_or_else(|| Usage(format!("fixture {} has no [leaf]", cover.spec.name)))?;
                glue::tangentiality_probe(&cover, &leaf, &mut rng, points)?
            }
        };
        pass &= rep.pass;
        let _ = writeln!(out, "{rep}");
    }
    Ok((i32::from(!pass), out))
}
