//! Gluing local star products over a cover of boxes, evaluated numerically.
//!
//! Chart `r` carries a local product `*_r`; `T_sr` carries chart-`r`
//! functions to chart `s`. With a partition of unity `phi_r` the operators
//! `A_r = phi_r Id + sum_s phi_s T_sr` define the glued product
//! `f * g = A_r(A_r^{-1} f *_r A_r^{-1} g)` on `U_r`.

pub mod diffop;
pub mod fixture;
pub mod func;
pub mod jet;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use diffop::{apply_diffop, local_star_values, DiffOp, HJet, LocalStar};
pub use fixture::{builtin_fixture, builtin_fixture_names, load_fixture, parse_fixture};
pub use func::{parse_smooth, Evaluator, SmoothFunc};
pub use jet::{Jet, MultiIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlueError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

pub const TOL_OPERATOR: f64 = 1e-10;
pub const TOL_ASSOC: f64 = 1e-8;
pub const TOL_CHART: f64 = 1e-9;
pub const TOL_PARTITION: f64 = 1e-12;

/// An open box `U_r` and the closed box carrying its bump.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub support_lo: Vec<f64>,
    pub support_hi: Vec<f64>,
}

impl Chart {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, margin: f64) -> Self {
        let support_lo = lo.iter().map(|v| v + margin).collect();
        let support_hi = hi.iter().map(|v| v - margin).collect();
        Chart { lo, hi, support_lo, support_hi }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a < v && v < b)
    }

    pub fn intersect(&self, other: &Chart) -> Option<(Vec<f64>, Vec<f64>)> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        lo.iter().zip(&hi).all(|(a, b)| a < b).then_some((lo, hi))
    }

    /// Product of bumps rescaled to the support box.
    fn weight(&self, power: u32) -> SmoothFunc {
        let factors = (0..self.lo.len()).map(|i| {
            let c = 0.5 * (self.support_lo[i] + self.support_hi[i]);
            let s = 2.0 / (self.support_hi[i] - self.support_lo[i]);
            SmoothFunc::coord(i).sub(&SmoothFunc::constant(c)).scale(s).bump()
        });
        SmoothFunc::product(factors).pow(power)
    }
}

/// Extra term `coeff * h^slot * d^index` added to `T_{to,from}` (0-based).
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub to: usize,
    pub from: usize,
    pub slot: usize,
    pub index: MultiIndex,
    pub coeff: SmoothFunc,
}

/// The leaf `x_coordinate = value` (0-based coordinate).
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub coordinate: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct CoverSpec {
    pub name: String,
    pub n: usize,
    pub h: usize,
    pub jet_order: usize,
    pub charts: Vec<Chart>,
    /// Constant bivector of the Moyal product used on every chart.
    pub poisson: Vec<Vec<f64>>,
    /// Per-chart vector field `X_r`; `T_sr = exp(h (X_s - X_r))`.
    pub flows: Vec<Option<Vec<SmoothFunc>>>,
    pub perturbations: Vec<Perturbation>,
    pub leaf: Option<Leaf>,
    pub partition_power: u32,
}

pub struct ChartCover {
    pub spec: CoverSpec,
    pub weights: Vec<SmoothFunc>,
    pub partition: Vec<SmoothFunc>,
    transitions: BTreeMap<(usize, usize), DiffOp>,
    pub local: Vec<LocalStar>,
    a: Vec<DiffOp>,
    a_inv: Vec<DiffOp>,
}

impl fmt::Debug for ChartCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartCover").field("name", &self.spec.name).field("charts", &self.spec.charts.len()).finish()
    }
}

impl ChartCover {
    pub fn new(spec: CoverSpec) -> Result<Self, GlueError> {
        let n = spec.n;
        let k = spec.charts.len();
        if k == 0 {
            return Err(GlueError::Fixture("a cover needs at least one chart".into()));
        }
        for (r, c) in spec.charts.iter().enumerate() {
            let dims = [c.lo.len(), c.hi.len(), c.support_lo.len(), c.support_hi.len()];
            if dims.iter().any(|&d| d != n) {
                return Err(GlueError::Fixture(format!("chart {} has the wrong dimension", r + 1)));
            }
            let nested = (0..n).all(|i| c.lo[i] < c.support_lo[i] && c.support_lo[i] < c.support_hi[i] && c.support_hi[i] < c.hi[i]);
            if !nested {
                return Err(GlueError::Fixture(format!("support of chart {} is not inside its box", r + 1)));
            }
        }
        if spec.poisson.len() != n || spec.poisson.iter().any(|r| r.len() != n) {
            return Err(GlueError::Fixture("poisson matrix must be n x n".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if spec.poisson[i][j] != -spec.poisson[j][i] {
                    return Err(GlueError::Fixture("poisson matrix must be antisymmetric".into()));
                }
            }
        }
        if spec.flows.len() != k || spec.flows.iter().flatten().any(|f| f.len() != n) {
            return Err(GlueError::Fixture("one flow of length n per chart".into()));
        }
        if let Some(l) = &spec.leaf {
            if l.coordinate >= n {
                return Err(GlueError::Fixture("leaf coordinate out of range".into()));
            }
        }

        let weights: Vec<SmoothFunc> = spec.charts.iter().map(|c| c.weight(spec.partition_power)).collect();
        let inv_total = SmoothFunc::sum(weights.iter().cloned()).recip();
        let partition = weights.iter().map(|w| w.mul(&inv_total)).collect();

        let field = |r: usize| match &spec.flows[r] {
            Some(f) => DiffOp::vector_field(f, spec.h),
            None => DiffOp::zero(n, spec.h),
        };
        let mut transitions = BTreeMap::new();
        for s in 0..k {
            for r in 0..k {
                if s != r && spec.charts[s].intersect(&spec.charts[r]).is_some() {
                    transitions.insert((s, r), DiffOp::exp_h(&field(s).sub(&field(r))));
                }
            }
        }
        for p in &spec.perturbations {
            let t = transitions
                .get_mut(&(p.to, p.from))
                .ok_or_else(|| GlueError::Fixture(format!("no overlap for T_{}{}", p.to + 1, p.from + 1)))?;
            if p.index.len() != n {
                return Err(GlueError::Fixture("perturbation index has the wrong length".into()));
            }
            t.add_term(p.slot, p.index.clone(), p.coeff.clone());
        }

        let local = vec![LocalStar::moyal(&spec.poisson, spec.h); k];
        let mut cover = ChartCover { spec, weights, partition, transitions, local, a: vec![], a_inv: vec![] };
        for r in 0..k {
            let a = cover.build_a(r);
            cover.a_inv.push(a.invert()?);
            cover.a.push(a);
        }
        let need = cover.spec.h + 2 * cover.level();
        if cover.spec.jet_order < need {
            return Err(GlueError::Usage(format!("jet order {} below the {need} reachable at h^{}", cover.spec.jet_order, cover.spec.h)));
        }
        Ok(cover)
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn h(&self) -> usize {
        self.spec.h
    }

    pub fn charts(&self) -> &[Chart] {
        &self.spec.charts
    }

    pub fn overlaps(&self, r: usize, s: usize) -> bool {
        self.spec.charts[r].intersect(&self.spec.charts[s]).is_some()
    }

    /// `T_sr`, the identity on the diagonal.
    pub fn transition(&self, s: usize, r: usize) -> Option<DiffOp> {
        if s == r {
            return Some(DiffOp::identity(self.n(), self.h()));
        }
        self.transitions.get(&(s, r)).cloned()
    }

    /// `Id + sum_{s != r} phi_s (T_sr - Id)`, which is `phi_r Id + sum phi_s T_sr`
    /// because the partition sums to one.
    fn build_a(&self, r: usize) -> DiffOp {
        let id = DiffOp::identity(self.n(), self.h());
        let mut a = id.clone();
        for ((s, rr), t) in &self.transitions {
            if *rr == r {
                a = a.add(&t.sub(&id).mul_func(&self.partition[*s]));
            }
        }
        a
    }

    pub fn a_op(&self, r: usize) -> &DiffOp {
        &self.a[r]
    }

    pub fn a_inv(&self, r: usize) -> &DiffOp {
        &self.a_inv[r]
    }

    /// Jet level consumed by one glued multiplication.
    pub fn level(&self) -> usize {
        (0..self.a.len())
            .map(|r| self.a[r].excess() + self.a_inv[r].excess() + self.local[r].excess())
            .max()
            .unwrap_or(0)
    }

    pub fn total_weight(&self, x: &[f64]) -> Result<f64, GlueError> {
        self.weights.iter().map(|w| w.eval(x)).sum()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.chart_of(x).is_some() && self.total_weight(x).is_ok_and(|w| w > 0.0)
    }

    pub fn chart_of(&self, x: &[f64]) -> Option<usize> {
        self.spec.charts.iter().position(|c| c.contains(x))
    }

    pub fn glued_hjet(&self, ev: &mut Evaluator, r: usize, f: &HJet, g: &HJet) -> Result<HJet, GlueError> {
        let fi = self.a_inv[r].apply(ev, f)?;
        let gi = self.a_inv[r].apply(ev, g)?;
        let p = self.local[r].apply(ev, &fi, &gi)?;
        self.a[r].apply(ev, &p)
    }

    fn check_point(&self, x: &[f64], via: Option<usize>) -> Result<usize, GlueError> {
        if x.len() != self.n() {
            return Err(GlueError::Usage(format!("point of dimension {} in a cover of dimension {}", x.len(), self.n())));
        }
        let r = match via {
            Some(r) if r < self.spec.charts.len() && self.spec.charts[r].contains(x) => r,
            Some(r) => return Err(GlueError::Domain(format!("{x:?} is not in chart {}", r + 1))),
            None => self.chart_of(x).ok_or_else(|| GlueError::Domain(format!("{x:?} is outside the cover")))?,
        };
        if self.total_weight(x)? <= 0.0 {
            return Err(GlueError::Domain(format!("partition undefined at {x:?}")));
        }
        Ok(r)
    }

    /// Value series `[h^0, .., h^H]` of the glued product at `x`, computed in
    /// chart `via` or the first chart containing `x`.
    pub fn glued_star(&self, f: &SmoothFunc, g: &SmoothFunc, x: &[f64], via: Option<usize>) -> Result<Vec<f64>, GlueError> {
        let r = self.check_point(x, via)?;
        let mut ev = Evaluator::new(x);
        let l = self.level();
        let fj = HJet::from_func(&mut ev, f, self.h(), l)?;
        let gj = HJet::from_func(&mut ev, g, self.h(), l)?;
        Ok(self.glued_hjet(&mut ev, r, &fj, &gj)?.values())
    }

    /// `(f*g)*k - f*(g*k)` at `x`, per h-order.
    pub fn associator(&self, f: &SmoothFunc, g: &SmoothFunc, k: &SmoothFunc, x: &[f64]) -> Result<Vec<f64>, GlueError> {
        let r = self.check_point(x, None)?;
        let mut ev = Evaluator::new(x);
        let l = 2 * self.level();
        let fj = HJet::from_func(&mut ev, f, self.h(), l)?;
        let gj = HJet::from_func(&mut ev, g, self.h(), l)?;
        let kj = HJet::from_func(&mut ev, k, self.h(), l)?;
        let fg = self.glued_hjet(&mut ev, r, &fj, &gj)?;
        let gk = self.glued_hjet(&mut ev, r, &gj, &kj)?;
        let left = self.glued_hjet(&mut ev, r, &fg, &kj)?;
        let right = self.glued_hjet(&mut ev, r, &fj, &gk)?;
        Ok(left.sub(&right).values())
    }

    /// The same cover with partition weights raised to `power`.
    pub fn with_partition_power(&self, power: u32) -> Result<ChartCover, GlueError> {
        let mut spec = self.spec.clone();
        spec.partition_power = power;
        ChartCover::new(spec)
    }

    fn pairs(&self) -> Vec<(usize, usize, Vec<f64>, Vec<f64>)> {
        let k = self.spec.charts.len();
        let mut out = Vec::new();
        for r in 0..k {
            for s in r + 1..k {
                if let Some((lo, hi)) = self.spec.charts[r].intersect(&self.spec.charts[s]) {
                    out.push((r, s, lo, hi));
                }
            }
        }
        out
    }

    fn triples(&self) -> Vec<(usize, usize, usize, Vec<f64>, Vec<f64>)> {
        let k = self.spec.charts.len();
        let mut out = Vec::new();
        for r in 0..k {
            for s in 0..k {
                for t in 0..k {
                    if r == s || s == t || r == t {
                        continue;
                    }
                    let Some((lo, hi)) = self.spec.charts[r].intersect(&self.spec.charts[s]) else { continue };
                    let box_rs = Chart { lo: lo.clone(), hi: hi.clone(), support_lo: lo, support_hi: hi };
                    if let Some((lo, hi)) = box_rs.intersect(&self.spec.charts[t]) {
                        out.push((r, s, t, lo, hi));
                    }
                }
            }
        }
        out
    }
}

/// One line of a defect table.
#[derive(Clone, Debug, PartialEq)]
pub struct GlueReport {
    pub check: String,
    pub tolerance: f64,
    /// Maximal defect per h-order.
    pub defects: Vec<f64>,
    pub samples: usize,
    pub pass: bool,
    pub worst_point: Option<Vec<f64>>,
}

impl GlueReport {
    fn new(check: &str, tolerance: f64, h: usize) -> Self {
        GlueReport { check: check.into(), tolerance, defects: vec![0.0; h + 1], samples: 0, pass: true, worst_point: None }
    }

    fn record(&mut self, x: &[f64], d: &[f64]) {
        self.samples += 1;
        let worst = self.max_defect();
        for (acc, v) in self.defects.iter_mut().zip(d) {
            let v = if v.is_finite() { v.abs() } else { f64::INFINITY };
            *acc = acc.max(v);
        }
        if self.max_defect() > worst {
            self.worst_point = Some(x.to_vec());
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.defects.iter().all(|d| *d < self.tolerance);
        self
    }

    pub fn max_defect(&self) -> f64 {
        self.defects.iter().cloned().fold(0.0, f64::max)
    }
}

impl fmt::Display for GlueReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let defects: Vec<String> = self.defects.iter().enumerate().map(|(k, d)| format!("h^{k}:{d:.3e}")).collect();
        write!(
            f,
            "{}\t{}\t{} samples={} tol={:.0e}",
            self.check,
            if self.pass { "PASS" } else { "FAIL" },
            defects.join(" "),
            self.samples,
            self.tolerance
        )?;
        if let (false, Some(x)) = (self.pass, &self.worst_point) {
            let pt: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
            write!(f, " at ({})", pt.join(", "))?;
        }
        Ok(())
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect()
}

/// A point of the box where the partition is defined.
fn domain_point(cover: &ChartCover, rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Option<Vec<f64>> {
    (0..1000).map(|_| uniform_in(rng, lo, hi)).find(|x| cover.in_domain(x))
}

/// A smooth test function: a random cubic plus a damped exponential.
pub fn random_function(n: usize, rng: &mut ChaCha8Rng) -> SmoothFunc {
    let mut terms = Vec::new();
    for _ in 0..5 {
        let c = rng.gen_range(-1.0..1.0);
        let deg = rng.gen_range(0..=3);
        let factors = (0..deg).map(|_| SmoothFunc::coord(rng.gen_range(0..n)));
        terms.push(SmoothFunc::product(factors).scale(c));
    }
    let lin = SmoothFunc::sum((0..n).map(|i| SmoothFunc::coord(i).scale(rng.gen_range(-0.3..0.3))));
    terms.push(lin.exp().scale(rng.gen_range(-1.0..1.0)));
    SmoothFunc::sum(terms)
}

/// `sum phi_r = 1` at domain points and `phi_r = 0` on the faces of `U_r`.
pub fn partition_check(cover: &ChartCover, rng: &mut ChaCha8Rng, points: usize) -> Result<GlueReport, GlueError> {
    let mut rep = GlueReport::new("partition", TOL_PARTITION, 0);
    let charts = cover.charts();
    for _ in 0..points {
        let r = rng.gen_range(0..charts.len());
        let c = &charts[r];
        if let Some(x) = domain_point(cover, rng, &c.lo, &c.hi) {
            let s: f64 = cover.partition.iter().map(|p| p.eval(&x)).sum::<Result<f64, _>>()?;
            rep.record(&x, &[s - 1.0]);
        }
        let i = rng.gen_range(0..cover.n());
        let mut y = uniform_in(rng, &c.lo, &c.hi);
        y[i] = if rng.gen_bool(0.5) { c.lo[i] } else { c.hi[i] };
        rep.record(&y, &[cover.weights[r].eval(&y)?]);
    }
    Ok(rep.finish())
}

/// `T_rs T_sr = Id` and `T_ts T_sr = T_tr` by coefficient size on overlaps.
pub fn cocycle_check(cover: &ChartCover, rng: &mut ChaCha8Rng, points: usize) -> Result<GlueReport, GlueError> {
    let mut rep = GlueReport::new("cocycle", TOL_OPERATOR, cover.h());
    let id = DiffOp::identity(cover.n(), cover.h());
    for (r, s, lo, hi) in cover.pairs() {
        for (a, b) in [(r, s), (s, r)] {
            let d = cover.transition(a, b).unwrap().compose(&cover.transition(b, a).unwrap()).sub(&id);
            for _ in 0..points {
                let x = uniform_in(rng, &lo, &hi);
                rep.record(&x, &d.coeff_norms(&x)?);
            }
        }
    }
    for (r, s, t, lo, hi) in cover.triples() {
        let d = cover.transition(t, s).unwrap().compose(&cover.transition(s, r).unwrap()).sub(&cover.transition(t, r).unwrap());
        for _ in 0..points {
            let x = uniform_in(rng, &lo, &hi);
            rep.record(&x, &d.coeff_norms(&x)?);
        }
    }
    Ok(rep.finish())
}

/// `A_r T_rt - A_t` applied to random functions on overlaps.
pub fn chart_consistency_check(cover: &ChartCover, rng: &mut ChaCha8Rng, points: usize) -> Result<GlueReport, GlueError> {
    let mut rep = GlueReport::new("consistency", TOL_OPERATOR, cover.h());
    for (r, t, lo, hi) in cover.pairs() {
        for (a, b) in [(r, t), (t, r)] {
            let d = cover.a_op(a).compose(&cover.transition(a, b).unwrap()).sub(cover.a_op(b));
            for _ in 0..points {
                let Some(x) = domain_point(cover, rng, &lo, &hi) else { continue };
                let f = random_function(cover.n(), rng);
                rep.record(&x, &apply_diffop(&d, &f, &x)?);
            }
        }
    }
    Ok(rep.finish())
}

/// The glued product computed in either chart of an overlap.
pub fn chart_agreement_check(cover: &ChartCover, rng: &mut ChaCha8Rng, points: usize) -> Result<GlueReport, GlueError> {
    let mut rep = GlueReport::new("agreement", TOL_CHART, cover.h());
    for (r, s, lo, hi) in cover.pairs() {
        for _ in 0..points {
            let Some(x) = domain_point(cover, rng, &lo, &hi) else { continue };
            let f = random_function(cover.n(), rng);
            let g = random_function(cover.n(), rng);
            let a = cover.glued_star(&f, &g, &x, Some(r))?;
            let b = cover.glued_star(&f, &g, &x, Some(s))?;
            let d: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
            rep.record(&x, &d);
        }
    }
    Ok(rep.finish())
}

/// Points drawn from overlaps when there are any, else from chart supports.
fn spread_point(cover: &ChartCover, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let pairs = cover.pairs();
    if !pairs.is_empty() && rng.gen_bool(0.75) {
        let (_, _, lo, hi) = &pairs[rng.gen_range(0..pairs.len())];
        return domain_point(cover, rng, lo, hi);
    }
    let c = &cover.charts()[rng.gen_range(0..cover.charts().len())];
    domain_point(cover, rng, &c.support_lo, &c.support_hi)
}

pub fn associativity_check(cover: &ChartCover, rng: &mut ChaCha8Rng, points: usize) -> Result<GlueReport, GlueError> {
    let mut rep = GlueReport::new("assoc", TOL_ASSOC, cover.h());
    for _ in 0..points {
        let Some(x) = spread_point(cover, rng) else { continue };
        let [f, g, k] = [(); 3].map(|_| random_function(cover.n(), rng));
        rep.record(&x, &cover.associator(&f, &g, &k, &x)?);
    }
    Ok(rep.finish())
}

/// Straddling pairs across each face of `U_s` lying inside `U_r`: one side
/// is computed in chart `r` alone, the other in chart `s`.
pub fn continuity_check(cover: &ChartCover, rng: &mut ChaCha8Rng, points: usize) -> Result<GlueReport, GlueError> {
    let mut rep = GlueReport::new("continuity", TOL_CHART, cover.h());
    let charts = cover.charts();
    for (r0, s0, lo, hi) in cover.pairs() {
        for (r, s) in [(r0, s0), (s0, r0)] {
            for i in 0..cover.n() {
                for (face, inward) in [(charts[s].lo[i], 1.0), (charts[s].hi[i], -1.0)] {
                    if !(charts[r].lo[i] < face && face < charts[r].hi[i]) {
                        continue;
                    }
                    for _ in 0..points {
                        let mut y = uniform_in(rng, &lo, &hi);
                        y[i] = face;
                        let eps = 1e-13 * face.abs().max(1.0);
                        let mut x_in = y.clone();
                        x_in[i] += inward * eps;
                        let mut x_out = y.clone();
                        x_out[i] -= inward * eps;
                        if !cover.in_domain(&x_in) || !cover.in_domain(&x_out) || !charts[r].contains(&x_in) || !charts[r].contains(&x_out) {
                            continue;
                        }
                        let f = random_function(cover.n(), rng);
                        let g = random_function(cover.n(), rng);
                        let a = cover.glued_star(&f, &g, &x_out, Some(r))?;
                        let b = cover.glued_star(&f, &g, &x_in, Some(s))?;
                        let d: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
                        rep.record(&y, &d);
                    }
                }
            }
        }
    }
    Ok(rep.finish())
}

/// `(x_c - v) g1 * g2` and `g2 * (x_c - v) g1` on the leaf `x_c = v`.
pub fn tangentiality_probe(cover: &ChartCover, leaf: &Leaf, rng: &mut ChaCha8Rng, points: usize) -> Result<GlueReport, GlueError> {
    let mut rep = GlueReport::new("tangential", TOL_OPERATOR, cover.h());
    let n = cover.n();
    for _ in 0..points {
        let Some(mut x) = (0..100).find_map(|_| {
            let mut x = spread_point(cover, rng)?;
            x[leaf.coordinate] = leaf.value;
            cover.in_domain(&x).then_some(x)
        }) else {
            continue;
        };
        x[leaf.coordinate] = leaf.value;
        let g1 = random_function(n, rng);
        let g2 = random_function(n, rng);
        let f = SmoothFunc::coord(leaf.coordinate).sub(&SmoothFunc::constant(leaf.value)).mul(&g1);
        let a = cover.glued_star(&f, &g2, &x, None)?;
        let b = cover.glued_star(&g2, &f, &x, None)?;
        let d: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u.abs().max(v.abs())).collect();
        rep.record(&x, &d);
    }
    Ok(rep.finish())
}

/// Difference of the glued products for the partition and its square.
/// Equal at `h^0`; higher orders are only recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionDifference {
    pub per_order: Vec<f64>,
    pub samples: usize,
}

pub fn partition_difference(cover: &ChartCover, rng: &mut ChaCha8Rng, points: usize) -> Result<PartitionDifference, GlueError> {
    let alt = cover.with_partition_power(cover.spec.partition_power + 1)?;
    let mut per_order = vec![0.0f64; cover.h() + 1];
    let mut samples = 0;
    for _ in 0..points {
        let Some(x) = spread_point(cover, rng) else { continue };
        if !alt.in_domain(&x) {
            continue;
        }
        let f = random_function(cover.n(), rng);
        let g = random_function(cover.n(), rng);
        let a = cover.glued_star(&f, &g, &x, None)?;
        let b = alt.glued_star(&f, &g, &x, None)?;
        for (acc, (u, v)) in per_order.iter_mut().zip(a.iter().zip(&b)) {
            *acc = acc.max((u - v).abs());
        }
        samples += 1;
    }
    Ok(PartitionDifference { per_order, samples })
}
