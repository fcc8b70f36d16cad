//! Truncated Taylor expansions in `n` variables.
//!
//! Coefficients are `d^a f / a!`. Multi-indices are enumerated by total
//! degree, so the space of order `K'` is a prefix of the space of order `K`
//! and truncation is a slice.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::GlueError;

pub type MultiIndex = Vec<u32>;

pub struct JetSpace {
    n: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(i, j, i+j)` with `|i| + |j| <= order`, sorted by `|i| + |j|`
    table: Vec<(u32, u32, u32)>,
    table_len: Vec<usize>,
}

fn compositions(n: usize, d: u32, out: &mut Vec<MultiIndex>) {
    fn go(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            go(n, left - a, cur, out);
            cur.pop();
        }
    }
    if n == 0 {
        if d == 0 {
            out.push(vec![]);
        }
        return;
    }
    go(n, d, &mut Vec::with_capacity(n), out);
}

impl JetSpace {
    fn build(n: usize, order: usize) -> Self {
        let mut indices = Vec::new();
        let mut dims = Vec::with_capacity(order + 1);
        for d in 0..=order {
            compositions(n, d as u32, &mut indices);
            dims.push(indices.len());
        }
        let lookup: HashMap<MultiIndex, usize> = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let deg = |i: usize| dims.iter().position(|&d| i < d).unwrap();
        let mut table = Vec::new();
        for i in 0..indices.len() {
            for j in 0..dims[order - deg(i)] {
                let s: MultiIndex = indices[i].iter().zip(&indices[j]).map(|(a, b)| a + b).collect();
                table.push((i as u32, j as u32, lookup[&s] as u32));
            }
        }
        table.sort_by_key(|&(i, j, _)| deg(i as usize) + deg(j as usize));
        let table_len = (0..=order)
            .map(|k| table.iter().take_while(|&&(i, j, _)| deg(i as usize) + deg(j as usize) <= k).count())
            .collect();
        JetSpace { n, order, indices, lookup, table, table_len }
    }

    pub fn get(n: usize, order: usize) -> Arc<JetSpace> {
        static SPACES: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let m = SPACES.get_or_init(Default::default);
        if let Some(s) = m.lock().unwrap().get(&(n, order)) {
            return s.clone();
        }
        let s = Arc::new(JetSpace::build(n, order));
        m.lock().unwrap().entry((n, order)).or_insert(s).clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index_of(&self, a: &[u32]) -> Option<usize> {
        self.lookup.get(a).copied()
    }
}

pub fn degree(a: &[u32]) -> usize {
    a.iter().map(|&x| x as usize).sum()
}

pub fn factorial(a: &[u32]) -> f64 {
    a.iter().map(|&k| (1..=k).map(f64::from).product::<f64>()).product()
}

#[derive(Clone)]
pub struct Jet {
    base: Arc<[f64]>,
    space: Arc<JetSpace>,
    c: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet").field("base", &self.base).field("order", &self.order()).field("c", &self.c).finish()
    }
}

impl Jet {
    pub fn zero(base: Arc<[f64]>, order: usize) -> Self {
        let space = JetSpace::get(base.len(), order);
        let c = vec![0.0; space.len()];
        Jet { base, space, c }
    }

    pub fn constant(base: Arc<[f64]>, order: usize, v: f64) -> Self {
        let mut j = Jet::zero(base, order);
        j.c[0] = v;
        j
    }

    /// The coordinate function `x_i` (0-based).
    pub fn coordinate(base: Arc<[f64]>, order: usize, i: usize) -> Self {
        let mut j = Jet::constant(base.clone(), order, base[i]);
        if order >= 1 {
            let mut e = vec![0; base.len()];
            e[i] = 1;
            let k = j.space.index_of(&e).unwrap();
            j.c[k] = 1.0;
        }
        j
    }

    pub fn base(&self) -> &Arc<[f64]> {
        &self.base
    }

    pub fn nvars(&self) -> usize {
        self.space.n
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient at `a`; zero beyond the truncation order.
    pub fn coeff(&self, a: &[u32]) -> f64 {
        self.space.index_of(a).map_or(0.0, |k| self.c[k])
    }

    /// `d^a f` at the base point.
    pub fn derivative_value(&self, a: &[u32]) -> f64 {
        self.coeff(a) * factorial(a)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let space = JetSpace::get(self.nvars(), order);
        let c = self.c[..space.len()].to_vec();
        Jet { base: self.base.clone(), space, c }
    }

    fn lowest<'a>(&'a self, other: &'a Jet) -> &'a Arc<JetSpace> {
        if self.order() <= other.order() {
            &self.space
        } else {
            &other.space
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let space = self.lowest(other).clone();
        let c = (0..space.len()).map(|k| self.c[k] + other.c[k]).collect();
        Jet { base: self.base.clone(), space, c }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let space = self.lowest(other).clone();
        let c = (0..space.len()).map(|k| self.c[k] - other.c[k]).collect();
        Jet { base: self.base.clone(), space, c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { base: self.base.clone(), space: self.space.clone(), c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn add_assign(&mut self, other: &Jet) {
        if other.order() < self.order() {
            *self = self.truncate(other.order());
        }
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += b;
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Jet {
        let space = self.lowest(other).clone();
        let mut c = vec![0.0; space.len()];
        for &(i, j, k) in &space.table[..space.table_len[space.order]] {
            let (a, b) = (self.c[i as usize], other.c[j as usize]);
            if a != 0.0 && b != 0.0 {
                c[k as usize] += a * b;
            }
        }
        Jet { base: self.base.clone(), space, c }
    }

    pub fn pow(&self, k: u32) -> Jet {
        let mut out = Jet::constant(self.base.clone(), self.order(), 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Jet of `d^a f`, of order `K - |a|`.
    pub fn differentiate(&self, a: &[u32]) -> Result<Jet, GlueError> {
        let d = degree(a);
        if d > self.order() {
            return Err(GlueError::Usage(format!("derivative of order {d} from a jet of order {}", self.order())));
        }
        let space = JetSpace::get(self.nvars(), self.order() - d);
        let c = space
            .indices
            .iter()
            .map(|b| {
                let s: MultiIndex = b.iter().zip(a).map(|(x, y)| x + y).collect();
                let ratio: f64 = s.iter().zip(b).map(|(&t, &u)| ((u + 1)..=t).map(f64::from).product::<f64>()).product();
                self.coeff(&s) * ratio
            })
            .collect();
        Ok(Jet { base: self.base.clone(), space, c })
    }

    /// `sum_k a_k (f - f(x))^k` by Horner.
    fn compose_series(&self, a: &[f64]) -> Jet {
        let mut u = self.clone();
        u.c[0] = 0.0;
        let mut out = Jet::constant(self.base.clone(), self.order(), a[a.len() - 1]);
        for ak in a[..a.len() - 1].iter().rev() {
            out = out.mul(&u);
            out.c[0] += ak;
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut a = Vec::with_capacity(self.order() + 1);
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            a.push(e / fact);
        }
        self.compose_series(&a)
    }

    pub fn recip(&self) -> Result<Jet, GlueError> {
        let v = self.value();
        if v == 0.0 {
            return Err(GlueError::Domain(format!("reciprocal of zero at {:?}", self.base)));
        }
        let a: Vec<f64> = (0..=self.order()).map(|k| (-1f64).powi(k as i32) / v.powi(k as i32 + 1)).collect();
        Ok(self.compose_series(&a))
    }

    /// `exp(-1/(1-t^2))` inside `|t| < 1`, identically zero outside.
    pub fn bump(&self) -> Jet {
        let t = self.value();
        if t.abs() >= 1.0 {
            return Jet::zero(self.base.clone(), self.order());
        }
        let one = Jet::constant(self.base.clone(), self.order(), 1.0);
        let d = one.sub(&self.mul(self));
        d.recip().expect("1 - t^2 > 0 inside the bump").scale(-1.0).exp()
    }
}
