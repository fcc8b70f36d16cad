//! TOML cover descriptions.
//!
//! ```toml
//! name = "two-chart"
//! dim = 2
//! h_order = 2
//! jet_order = 4
//! margin = 0.25                       # support box = chart box shrunk by this
//! poisson = [["0", "1"], ["-1", "0"]] # constant Moyal bivector
//!
//! [[chart]]
//! lo = [-3.0, -3.0]
//! hi = [1.0, 3.0]
//! flow = ["x2", "1/2"]                # X_r; T_sr = exp(h (X_s - X_r))
//!
//! [[perturb]]                         # extra h^order d^index term in T_{to,from}
//! to = 1
//! from = 2
//! order = 1
//! index = [0, 1]
//! coeff = "1/10"
//!
//! [leaf]                              # x_coordinate = value
//! coordinate = 2
//! value = "1/2"
//! ```

use serde::Deserialize;

use super::func::parse_smooth;
use super::{Chart, ChartCover, CoverSpec, GlueError, Leaf, Perturbation};

const BUILTIN: &[(&str, &str)] = &[
    ("single-chart", include_str!("../../fixtures/single-chart.toml")),
    ("two-chart", include_str!("../../fixtures/two-chart.toml")),
    ("three-chart", include_str!("../../fixtures/three-chart.toml")),
    ("three-chart-perturbed", include_str!("../../fixtures/three-chart-perturbed.toml")),
    ("foliated-r4", include_str!("../../fixtures/foliated-r4.toml")),
    ("foliated-r4-leak", include_str!("../../fixtures/foliated-r4-leak.toml")),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureDoc {
    name: String,
    dim: usize,
    #[serde(default = "default_h")]
    h_order: usize,
    #[serde(default = "default_k")]
    jet_order: usize,
    #[serde(default = "default_margin")]
    margin: f64,
    poisson: Vec<Vec<String>>,
    chart: Vec<ChartDoc>,
    #[serde(default)]
    perturb: Vec<PerturbDoc>,
    leaf: Option<LeafDoc>,
}

fn default_h() -> usize {
    2
}

fn default_k() -> usize {
    4
}

fn default_margin() -> f64 {
    0.25
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartDoc {
    lo: Vec<f64>,
    hi: Vec<f64>,
    flow: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PerturbDoc {
    to: usize,
    from: usize,
    order: usize,
    index: Vec<u32>,
    coeff: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LeafDoc {
    coordinate: usize,
    value: String,
}

fn constant(src: &str, n: usize) -> Result<f64, GlueError> {
    parse_smooth(src, n)?.as_const().ok_or_else(|| GlueError::Fixture(format!("{src:?} is not a constant")))
}

fn chart_index(k: usize, count: usize) -> Result<usize, GlueError> {
    if k == 0 || k > count {
        return Err(GlueError::Fixture(format!("chart index {k} out of range 1..={count}")));
    }
    Ok(k - 1)
}

pub fn parse_fixture(src: &str) -> Result<CoverSpec, GlueError> {
    let doc: FixtureDoc = toml::from_str(src).map_err(|e| GlueError::Fixture(e.to_string()))?;
    let n = doc.dim;
    let poisson = doc
        .poisson
        .iter()
        .map(|row| row.iter().map(|v| constant(v, n)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let count = doc.chart.len();
    let mut charts = Vec::new();
    let mut flows = Vec::new();
    for c in &doc.chart {
        charts.push(Chart::new(c.lo.clone(), c.hi.clone(), doc.margin));
        flows.push(match &c.flow {
            Some(f) => Some(f.iter().map(|s| parse_smooth(s, n)).collect::<Result<Vec<_>, _>>()?),
            None => None,
        });
    }
    let perturbations = doc
        .perturb
        .iter()
        .map(|p| {
            Ok(Perturbation {
                to: chart_index(p.to, count)?,
                from: chart_index(p.from, count)?,
                slot: p.order,
                index: p.index.clone(),
                coeff: parse_smooth(&p.coeff, n)?,
            })
        })
        .collect::<Result<Vec<_>, GlueError>>()?;
    let leaf = match &doc.leaf {
        Some(l) if l.coordinate == 0 || l.coordinate > n => {
            return Err(GlueError::Fixture(format!("leaf coordinate {} out of range", l.coordinate)))
        }
        Some(l) => Some(Leaf { coordinate: l.coordinate - 1, value: constant(&l.value, n)? }),
        None => None,
    };
    Ok(CoverSpec {
        name: doc.name,
        n,
        h: doc.h_order,
        jet_order: doc.jet_order,
        charts,
        poisson,
        flows,
        perturbations,
        leaf,
        partition_power: 1,
    })
}

pub fn builtin_fixture_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_fixture(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// A built-in fixture name or a path to a fixture file.
pub fn load_fixture(name_or_path: &str) -> Result<ChartCover, GlueError> {
    let src = match builtin_fixture(name_or_path) {
        Some(s) => s.to_string(),
        None => std::fs::read_to_string(name_or_path)
            .map_err(|e| GlueError::Fixture(format!("cannot read {name_or_path}: {e}")))?,
    };
    ChartCover::new(parse_fixture(&src)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        for name in builtin_fixture_names() {
            let c = load_fixture(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.level(), 0, "{name}");
        }
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(parse_fixture("name = 'x'\ndim = 1\npoisson = [['0']]\nchart = []\nbogus = 1").is_err());
        let src = "name='x'\ndim=1\npoisson=[['1']]\n[[chart]]\nlo=[-1.0]\nhi=[1.0]\n";
        assert!(ChartCover::new(parse_fixture(src).unwrap()).is_err());
        let src = "name='x'\ndim=1\npoisson=[['0']]\n[leaf]\ncoordinate=2\nvalue='0'\n[[chart]]\nlo=[-1.0]\nhi=[1.0]\n";
        assert!(parse_fixture(src).is_err());
    }
}
