//! Lie algebra data, load-time validation and the linear Poisson bracket.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Deserialize;
use thiserror::Error;

use crate::coeff::{Poly, PolyError, Rational};
use crate::expr::{parse_expr, ParseError, VarNames};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("document error: {0}")]
    Document(String),
    #[error("bracket entry {entry} ('{text}'): {message}")]
    Bracket { entry: usize, text: String, message: String },
    #[error("invariant {index}: {source}")]
    Invariant { index: usize, source: ParseError },
    #[error("orbit constant {index}: {message}")]
    OrbitConstant { index: usize, message: String },
    #[error("antisymmetry violated: c_{i}{j}^{k} != -c_{j}{i}^{k}")]
    Antisymmetry { i: usize, j: usize, k: usize },
    #[error("Jacobi identity violated at (i,j,k,m) = ({i},{j},{k},{m})")]
    Jacobi { i: usize, j: usize, k: usize, m: usize },
    #[error("invariant {invariant} is not central: {{p_{invariant}, x_{var}}} != 0")]
    Centrality { invariant: usize, var: usize },
    #[error("unknown algebra '{0}'")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitConstant {
    pub values: Vec<Rational>,
    pub regular: bool,
}

/// A finite-dimensional Lie algebra over the rationals with supplied invariants.
///
/// Indices in the public API are 0-based; error messages and the text
/// format use 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    pub name: String,
    pub dim: usize,
    pub aliases: Vec<String>,
    /// Dense table `c[(i*n + j)*n + k] = c_ij^k`.
    table: Vec<Rational>,
    /// Sparse rows: `sparse[i*n + j]` lists `(k, c_ij^k)` with nonzero constants.
    sparse: Vec<Vec<(usize, Rational)>>,
    pub invariants: Vec<Poly>,
    pub orbit_constants: Vec<OrbitConstant>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    name: String,
    dim: usize,
    #[serde(default)]
    aliases: Vec<String>,
    #[serde(default)]
    brackets: Vec<String>,
    #[serde(default)]
    invariants: Vec<String>,
    #[serde(default)]
    orbit_constants: Vec<OrbitDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitDoc {
    values: Vec<String>,
    regular: String,
}

const CATALOG: &[(&str, &str)] = &[
    ("heisenberg", include_str!("../catalog/heisenberg.toml")),
    ("su2", include_str!("../catalog/su2.toml")),
    ("su3", include_str!("../catalog/su3.toml")),
];

pub fn catalog_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(n, _)| *n)
}

/// Raw text of a catalog entry.
pub fn catalog_source(name: &str) -> Option<&'static str> {
    CATALOG.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Load and validate a catalog algebra.
pub fn catalog(name: &str) -> Result<LieAlgebra, LieError> {
    let src = catalog_source(name).ok_or_else(|| LieError::Unknown(name.to_string()))?;
    load_algebra(src)
}

/// Parse and fully validate an algebra document.
pub fn load_algebra(src: &str) -> Result<LieAlgebra, LieError> {
    let a = LieAlgebra::parse_unchecked(src)?;
    a.validate()?;
    Ok(a)
}

fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = n.trim().parse().ok()?;
            let d: num_bigint::BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| Rational::new(n, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

fn parse_bracket(text: &str, n: usize) -> Result<(usize, usize, usize, Rational), String> {
    let (lhs, rhs) = text.split_once("->").ok_or("missing '->'")?;
    let ij: Vec<&str> = lhs.split_whitespace().collect();
    let kc: Vec<&str> = rhs.split_whitespace().collect();
    if ij.len() != 2 || kc.len() != 2 {
        return Err("expected 'i j -> k coeff'".into());
    }
    let idx = |s: &str| -> Result<usize, String> {
        let v: usize = s.parse().map_err(|_| format!("bad index '{s}'"))?;
        if v == 0 || v > n {
            return Err(format!("index {v} out of range 1..={n}"));
        }
        Ok(v - 1)
    };
    let c = parse_rational(kc[1]).ok_or_else(|| format!("bad coefficient '{}'", kc[1]))?;
    Ok((idx(ij[0])?, idx(ij[1])?, idx(kc[0])?, c))
}

impl LieAlgebra {
    /// Parse a document without checking antisymmetry, Jacobi or centrality.
    pub fn parse_unchecked(src: &str) -> Result<LieAlgebra, LieError> {
        let doc: Document = toml::from_str(src).map_err(|e| LieError::Document(e.to_string()))?;
        let n = doc.dim;
        if n == 0 {
            return Err(LieError::Document("dim must be positive".into()));
        }
        if !doc.aliases.is_empty() && doc.aliases.len() != n {
            return Err(LieError::Document(format!("expected {n} aliases, found {}", doc.aliases.len())));
        }
        let mut given: BTreeMap<(usize, usize), BTreeMap<usize, Rational>> = BTreeMap::new();
        for (entry, text) in doc.brackets.iter().enumerate() {
            let (i, j, k, c) = parse_bracket(text, n).map_err(|message| LieError::Bracket {
                entry: entry + 1,
                text: text.clone(),
                message,
            })?;
            *given.entry((i, j)).or_default().entry(k).or_insert_with(Rational::zero) += c;
        }
        let mut table = vec![Rational::zero(); n * n * n];
        for (&(i, j), row) in &given {
            for (&k, c) in row {
                table[(i * n + j) * n + k] = c.clone();
            }
        }
        // Antisymmetric completion for pairs that were never mentioned.
        for (&(i, j), row) in &given {
            if !given.contains_key(&(j, i)) {
                for (&k, c) in row {
                    table[(j * n + i) * n + k] = -c;
                }
            }
        }
        let names = VarNames::with_aliases(n, doc.aliases.clone());
        let invariants = doc
            .invariants
            .iter()
            .enumerate()
            .map(|(index, s)| {
                parse_expr(s, &names).map_err(|source| LieError::Invariant { index: index + 1, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let m = invariants.len();
        let mut orbit_constants = Vec::new();
        for (index, oc) in doc.orbit_constants.iter().enumerate() {
            let bad = |message: String| LieError::OrbitConstant { index: index + 1, message };
            if oc.values.len() != m {
                return Err(bad(format!("expected {m} values, found {}", oc.values.len())));
            }
            let values = oc
                .values
                .iter()
                .map(|v| parse_rational(v).ok_or_else(|| bad(format!("bad rational '{v}'"))))
                .collect::<Result<Vec<_>, _>>()?;
            let regular = match oc.regular.as_str() {
                "yes" => true,
                "no" => false,
                other => return Err(bad(format!("regular must be yes|no, found '{other}'"))),
            };
            orbit_constants.push(OrbitConstant { values, regular });
        }
        Ok(LieAlgebra::from_table(doc.name, n, doc.aliases, table, invariants, orbit_constants))
    }

    fn from_table(
        name: String,
        dim: usize,
        aliases: Vec<String>,
        table: Vec<Rational>,
        invariants: Vec<Poly>,
        orbit_constants: Vec<OrbitConstant>,
    ) -> LieAlgebra {
        let n = dim;
        let sparse = (0..n * n)
            .map(|ij| {
                (0..n)
                    .filter_map(|k| {
                        let c = &table[ij * n + k];
                        (!c.is_zero()).then(|| (k, c.clone()))
                    })
                    .collect()
            })
            .collect();
        LieAlgebra { name, dim, aliases, table, sparse, invariants, orbit_constants }
    }

    /// Build directly from a dense table, without validation.
    pub fn from_dense(name: &str, dim: usize, table: Vec<Rational>, invariants: Vec<Poly>) -> LieAlgebra {
        assert_eq!(table.len(), dim * dim * dim);
        LieAlgebra::from_table(name.to_string(), dim, Vec::new(), table, invariants, Vec::new())
    }

    /// `c_ij^k`, 0-based.
    pub fn c(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.table[(i * self.dim + j) * self.dim + k]
    }

    /// Nonzero `(k, c_ij^k)` for the bracket `[X_i, X_j]`, 0-based.
    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.sparse[i * self.dim + j]
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn var_names(&self) -> VarNames {
        VarNames::with_aliases(self.dim, self.aliases.clone())
    }

    /// 1-based `(i, j, k)` triples where antisymmetry fails.
    pub fn antisymmetry_report(&self) -> Vec<(usize, usize, usize)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    if *self.c(i, j, k) != -self.c(j, i, k) {
                        out.push((i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        out
    }

    /// All 1-based `(i, j, k, m)` where the Jacobi sum is nonzero.
    pub fn jacobi_report(&self) -> Vec<(usize, usize, usize, usize)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let mut s = Rational::zero();
                        for l in 0..n {
                            s += self.c(i, j, l) * self.c(l, k, m)
                                + self.c(j, k, l) * self.c(l, i, m)
                                + self.c(k, i, l) * self.c(l, j, m);
                        }
                        if !s.is_zero() {
                            out.push((i + 1, j + 1, k + 1, m + 1));
                        }
                    }
                }
            }
        }
        out
    }

    /// 1-based `(invariant, variable)` pairs with `{p, x_j} != 0`.
    pub fn centrality_report(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, p) in self.invariants.iter().enumerate() {
            for j in 0..self.dim {
                let xj = Poly::var(self.dim, j);
                let ok = p.nvars() == self.dim
                    && self.poisson_bracket(p, &xj).map(|b| b.is_zero()).unwrap_or(false);
                if !ok {
                    out.push((a + 1, j + 1));
                }
            }
        }
        out
    }

    /// Check antisymmetry, Jacobi and centrality; report the first violation.
    pub fn validate(&self) -> Result<(), LieError> {
        if let Some(&(i, j, k)) = self.antisymmetry_report().first() {
            return Err(LieError::Antisymmetry { i, j, k });
        }
        if let Some(&(i, j, k, m)) = self.jacobi_report().first() {
            return Err(LieError::Jacobi { i, j, k, m });
        }
        if let Some(&(invariant, var)) = self.centrality_report().first() {
            return Err(LieError::Centrality { invariant, var });
        }
        Ok(())
    }

    /// `{f, g} = sum c_ij^k x_k d_i f d_j g`.
    pub fn poisson_bracket(&self, f: &Poly, g: &Poly) -> Result<Poly, PolyError> {
        let n = self.dim;
        for p in [f, g] {
            if p.nvars() != n {
                return Err(PolyError::VarCount { left: n, right: p.nvars() });
            }
        }
        let df: Vec<Poly> = (0..n).map(|i| f.partial0(i)).collect();
        let dg: Vec<Poly> = (0..n).map(|j| g.partial0(j)).collect();
        let mut out = Poly::zero(n);
        for i in 0..n {
            if df[i].is_zero() {
                continue;
            }
            for j in 0..n {
                let row = self.bracket(i, j);
                if row.is_empty() || dg[j].is_zero() {
                    continue;
                }
                let mut lin = Poly::zero(n);
                for (k, c) in row {
                    lin += &Poly::var(n, *k).scale(c);
                }
                out += &(&lin * &(&df[i] * &dg[j]));
            }
        }
        Ok(out)
    }

    /// Regularity of an orbit constant vector: catalog metadata first, then
    /// a per-algebra rule; `None` when unknown.
    pub fn is_regular(&self, c0: &[Rational]) -> Option<bool> {
        if let Some(oc) = self.orbit_constants.iter().find(|oc| oc.values == c0) {
            return Some(oc.regular);
        }
        match (self.name.as_str(), c0) {
            ("su2", [c]) => Some(c > &Rational::zero()),
            ("heisenberg", [c]) => Some(!c.is_zero()),
            _ => None,
        }
    }

    /// Orbit constants flagged regular in the catalog.
    pub fn regular_constants(&self) -> impl Iterator<Item = &[Rational]> {
        self.orbit_constants.iter().filter(|o| o.regular).map(|o| o.values.as_slice())
    }
}

impl fmt::Display for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {}, rank {})", self.name, self.dim, self.rank())
    }
}
