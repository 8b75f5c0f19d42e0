//! Builders for the named examples and a controlled degenerate family, plus
//! lattice export of `f_ν` for plotting.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluators::EmbeddingMap;
use crate::geometry::{BoxRegion, Point, Vector};
use crate::measure::{
    doubling_ratio, BaseMeasure, BaseMeasure1D, BaseMeasureND, DirectionMeasure, HyperplaneMeasure, LineMeasure,
};
use crate::plan::SamplingPlan;

/// Half-width of the μ box in the degenerate family.
pub const DEGENERATE_EXTENT: f64 = 100.0;
/// Balls used for the doubling proxy of KMW scenarios.
pub const DOUBLING_BALLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpectedProperties {
    pub transverse: Tri,
    pub admissible: bool,
    pub closed_form_metric: Option<String>,
    /// `max μ(B(x,2r))/μ(B(x,r))` over window balls (KMW only).
    pub doubling_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Domain {
    Box { region: BoxRegion },
    FullSpace,
}

impl Domain {
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Domain::Box { region } => region.contains(x),
            Domain::FullSpace => true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub domain: Domain,
    /// Box where queries are sampled.
    pub window: BoxRegion,
    pub measure: Arc<HyperplaneMeasure>,
    pub basepoint: Point,
    pub expected: ExpectedProperties,
}

impl Scenario {
    pub fn embedding(&self) -> Result<EmbeddingMap> {
        EmbeddingMap::with_best_backend(self.measure.clone(), self.basepoint.clone())
    }

    /// Default sampling plan over the window.
    pub fn plan(&self, seed: u64) -> SamplingPlan {
        SamplingPlan::new(self.window.clone(), seed)
    }
}

/// Uniform normals with unit offset density: `d_ν = E|v₁| |x - y|` and
/// `f_ν(x) = (x - o)/n`.
pub fn build_crofton(n: usize) -> Result<Scenario> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(Scenario {
        name: format!("crofton-n{n}"),
        dim: n,
        domain: Domain::FullSpace,
        window: BoxRegion::centered_cube(n, 1.0)?,
        measure: Arc::new(HyperplaneMeasure::crofton(n, 1.0)?),
        basepoint: Point::origin(n)?,
        expected: ExpectedProperties {
            transverse: Tri::Yes,
            admissible: true,
            closed_form_metric: Some("E|v1| |x-y|".into()),
            doubling_ratio: None,
        },
    })
}

/// Pushforward of `μ × Uniform`. Requires `0 < ∫|x|⁻¹ dμ < ∞` and support not
/// contained in a line; marked transverse when the doubling ratio over balls
/// in the window is finite.
pub fn build_kmw(mu: BaseMeasureND, window: BoxRegion) -> Result<Scenario> {
    let n = mu.dim();
    if window.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: window.dim(),
        });
    }
    let tail = mu.tail1()?;
    if !(tail > 0.0 && tail.is_finite()) {
        return Err(Error::InvalidScenario(format!("tail integral ∫|x|⁻¹dμ = {tail} not in (0, ∞)")));
    }
    if mu.affine_rank() < 2 {
        return Err(Error::InvalidScenario("support of μ lies in a line".into()));
    }
    let plan = SamplingPlan::new(window.clone(), 0);
    let ratio = doubling_ratio(&mu, &plan.balls(DOUBLING_BALLS)).ok();
    let basepoint = window.center();
    let measure = HyperplaneMeasure::position_direction(BaseMeasure::Spatial(mu), DirectionMeasure::Uniform)?;
    let admissible = !measure.atom_points().iter().any(|(a, _)| window.contains(a));
    Ok(Scenario {
        name: "kmw".into(),
        dim: n,
        domain: Domain::Box { region: window.clone() },
        window,
        measure: Arc::new(measure),
        basepoint,
        expected: ExpectedProperties {
            transverse: if ratio.is_some_and(f64::is_finite) { Tri::Yes } else { Tri::Unknown },
            admissible,
            closed_form_metric: None,
            doubling_ratio: ratio,
        },
    })
}

/// Lines through points of `μ` on the real axis whose normals lie within
/// `capHalfAngle` of `e₁`. The cap mass `θ₀ / sin θ₀` makes
/// `f(t) - f(s) = μ([s, t]) e₁` on the axis.
pub fn build_beurling_ahlfors(mu1d: BaseMeasure1D, cap_half_angle: f64, window: BoxRegion) -> Result<Scenario> {
    if window.dim() != 2 {
        return Err(Error::InvalidDimension(window.dim()));
    }
    let (lo, hi) = (window.lo()[0], window.hi()[0]);
    if !mu1d.atoms_in(lo, hi).is_empty() {
        return Err(Error::InvalidScenario("μ has atoms inside the query window".into()));
    }
    if !(window.lo()[1] <= 0.0 && 0.0 <= window.hi()[1]) {
        return Err(Error::InvalidScenario("window must meet the real axis".into()));
    }
    let mass = cap_half_angle / cap_half_angle.sin();
    let omega = DirectionMeasure::symmetric_cap(vec![1.0, 0.0], cap_half_angle, mass)?;
    let line = LineMeasure::new(Point::origin(2)?, Vector::from_vec(vec![1.0, 0.0]), mu1d)?;
    let measure = HyperplaneMeasure::position_direction(BaseMeasure::Line(line), omega)?;
    let basepoint = Point::new(vec![0f64.clamp(lo, hi), 0.0])?;
    Ok(Scenario {
        name: "beurling-ahlfors".into(),
        dim: 2,
        domain: Domain::Box { region: window.clone() },
        window,
        measure: Arc::new(measure),
        basepoint,
        expected: ExpectedProperties {
            transverse: Tri::Yes,
            admissible: true,
            closed_form_metric: Some("cdf of mu on the real axis".into()),
            doubling_ratio: None,
        },
    })
}

/// Lebesgue μ on a large box with normals in two caps of half-angle `θ₀`
/// around `e₁` and `e₂`, each of mass 1/2.
pub fn build_degenerate_family(theta0: f64) -> Result<Scenario> {
    if !(theta0 > 0.0 && theta0 <= PI / 2.0) {
        return Err(Error::InvalidScenario(format!("θ₀ = {theta0} outside (0, π/2]")));
    }
    let mut pieces = DirectionMeasure::symmetric_cap(vec![1.0, 0.0], theta0, 0.5)?.projective_pieces();
    pieces.extend(DirectionMeasure::symmetric_cap(vec![0.0, 1.0], theta0, 0.5)?.projective_pieces());
    let omega = DirectionMeasure::arc_density(pieces)?;
    let mu = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, DEGENERATE_EXTENT)?, 1.0)?;
    let measure = HyperplaneMeasure::position_direction(BaseMeasure::Spatial(mu), omega)?;
    let window = BoxRegion::centered_cube(2, 1.0)?;
    Ok(Scenario {
        name: format!("degenerate-{theta0}"),
        dim: 2,
        domain: Domain::Box {
            region: BoxRegion::centered_cube(2, DEGENERATE_EXTENT)?,
        },
        window,
        measure: Arc::new(measure),
        basepoint: Point::origin(2)?,
        expected: ExpectedProperties {
            transverse: Tri::Yes,
            admissible: true,
            closed_form_metric: None,
            doubling_ratio: None,
        },
    })
}

/// Declarative scenario reference used by configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "builder", deny_unknown_fields)]
pub enum ScenarioSpec {
    Crofton {
        dim: usize,
    },
    #[serde(rename_all = "camelCase")]
    Kmw {
        mu: BaseMeasureND,
        window: BoxRegion,
    },
    #[serde(rename_all = "camelCase")]
    BeurlingAhlfors {
        mu: BaseMeasure1D,
        #[serde(default = "default_cap")]
        cap_half_angle: f64,
        window: BoxRegion,
    },
    Degenerate {
        theta0: f64,
    },
}

fn default_cap() -> f64 {
    PI / 6.0
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<Scenario> {
        match self {
            ScenarioSpec::Crofton { dim } => build_crofton(*dim),
            ScenarioSpec::Kmw { mu, window } => build_kmw(mu.clone(), window.clone()),
            ScenarioSpec::BeurlingAhlfors {
                mu,
                cap_half_angle,
                window,
            } => build_beurling_ahlfors(mu.clone(), *cap_half_angle, window.clone()),
            ScenarioSpec::Degenerate { theta0 } => build_degenerate_family(*theta0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridNode {
    pub index: Vec<usize>,
    pub x: Point,
    pub fx: Vec<f64>,
}

/// `f_ν` on a `resolution^n` lattice over the window, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridImage {
    pub dim: usize,
    pub resolution: usize,
    pub window: BoxRegion,
    pub nodes: Vec<GridNode>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn lattice_index(mut k: usize, n: usize, res: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for d in (0..n).rev() {
        idx[d] = k % res;
        k /= res;
    }
    idx
}

pub fn grid_export(s: &Scenario, resolution: usize, window: &BoxRegion) -> Result<GridImage> {
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    if window.dim() != s.dim {
        return Err(Error::DimensionMismatch {
            expected: s.dim,
            found: window.dim(),
        });
    }
    if let Domain::Box { region } = &s.domain {
        if !region.contains_box(window) {
            return Err(Error::InvalidScenario("grid window leaves the domain".into()));
        }
    }
    let f = s.embedding()?;
    let n = s.dim;
    let total = resolution.checked_pow(n as u32).ok_or_else(|| Error::Config("grid too large".into()))?;
    let nodes = (0..total)
        .into_par_iter()
        .map(|k| {
            let index = lattice_index(k, n, resolution);
            let c: Vec<f64> = (0..n)
                .map(|d| window.lo()[d] + window.width(d) * index[d] as f64 / (resolution - 1) as f64)
                .collect();
            let x = Point::new(c)?;
            let fx = f.eval(&x)?;
            if fx.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("grid image"));
            }
            Ok(GridNode {
                index,
                x,
                fx: fx.as_slice().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridImage {
        dim: n,
        resolution,
        window: window.clone(),
        nodes,
    })
}

impl GridImage {
    /// Header `dim,resolution,lo…,hi…` with its values, a node header, then
    /// one row `i,j[,k],x…,fx…` per node.
    pub fn to_csv(&self) -> String {
        let n = self.dim;
        let mut out = String::new();
        let mut names = vec!["dim".to_string(), "resolution".to_string()];
        names.extend((0..n).map(|d| format!("lo{d}")));
        names.extend((0..n).map(|d| format!("hi{d}")));
        let _ = writeln!(out, "{}", names.join(","));
        let mut vals = vec![n.to_string(), self.resolution.to_string()];
        vals.extend(self.window.lo().iter().map(|v| fmt_f64(*v)));
        vals.extend(self.window.hi().iter().map(|v| fmt_f64(*v)));
        let _ = writeln!(out, "{}", vals.join(","));
        let axes = ["i", "j", "k"];
        let mut head: Vec<String> = (0..n).map(|d| axes.get(d).map_or(format!("i{d}"), |s| s.to_string())).collect();
        head.extend((0..n).map(|d| format!("x{d}")));
        head.extend((0..n).map(|d| format!("f{d}")));
        let _ = writeln!(out, "{}", head.join(","));
        for node in &self.nodes {
            let mut row: Vec<String> = node.index.iter().map(|i| i.to_string()).collect();
            row.extend(node.x.iter().map(|v| fmt_f64(*v)));
            row.extend(node.fx.iter().map(|v| fmt_f64(*v)));
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("grid csv: {m}"));
        let mut lines = text.lines();
        lines.next().ok_or_else(|| bad("missing header"))?;
        let vals: Vec<&str> = lines.next().ok_or_else(|| bad("missing metadata"))?.split(',').collect();
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("bad number {s:?}")));
        let int = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(&format!("bad integer {s:?}")));
        let dim = int(vals.first().ok_or_else(|| bad("missing dim"))?)?;
        if vals.len() != 2 + 2 * dim {
            return Err(bad("metadata width"));
        }
        let resolution = int(vals[1])?;
        let lo = vals[2..2 + dim].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        let hi = vals[2 + dim..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        let window = BoxRegion::new(lo, hi)?;
        lines.next().ok_or_else(|| bad("missing node header"))?;
        let mut nodes = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 3 * dim {
                return Err(bad("node row width"));
            }
            let index = cells[..dim].iter().map(|s| int(s)).collect::<Result<Vec<_>>>()?;
            let x = Point::new(cells[dim..2 * dim].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?)?;
            let fx = cells[2 * dim..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
            nodes.push(GridNode { index, x, fx });
        }
        if nodes.len() != resolution.pow(dim as u32) {
            return Err(bad("node count does not match resolution"));
        }
        Ok(Self {
            dim,
            resolution,
            window,
            nodes,
        })
    }
}
