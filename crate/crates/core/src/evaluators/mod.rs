//! The integrals everything else consumes: `ν(π[x,y])`, `∫ sin α dν` over
//! `π[x,y]`, `f_ν(x)`, `ν(πQ)` and the angle profile `ν{α >= τ}`.

mod closed_form;
mod exact2d;
mod kmw;
mod monte_carlo;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use closed_form::kmw_constant_analytic;
pub use kmw::{calibrate_kmw_constant, calibrate_kmw_constant_unchecked, BallPushforward, KmwConstant, KmwGridFit, Provenance};
pub use monte_carlo::{mc_estimate, McEstimate, McQuery};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, BoxRegion, Cube, Point, Vector};
use crate::measure::HyperplaneMeasure;
use closed_form::ClosedForm;
use exact2d::Exact2D;

/// Default sample budget when Monte Carlo is picked automatically.
pub const DEFAULT_MC_BUDGET: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Backend {
    ClosedForm,
    Exact2D,
    MonteCarlo { budget: u64, seed: u64 },
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::ClosedForm => "closedForm",
            Backend::Exact2D => "exact2d",
            Backend::MonteCarlo { .. } => "monteCarlo",
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Backend::MonteCarlo { .. })
    }
}

/// Everything one segment query produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairQuantities {
    /// `ν(π[x,y])`.
    pub seg_mass: f64,
    /// `∫_{π[x,y]} sin α(x - y, H) dν(H)`.
    pub transversal: f64,
    /// `f_ν(x) - f_ν(y)`.
    pub delta_f: Vec<f64>,
    /// `ν{H ∈ π[x,y] : α(x - y, H) >= τ_k}`.
    pub profile: Vec<f64>,
    /// Standard errors in the layout `[seg, transversal, delta_f.., profile..]`
    /// (Monte Carlo only).
    pub std_errors: Option<Vec<f64>>,
}

impl PairQuantities {
    pub(crate) fn zero(n: usize, taus: usize) -> Self {
        Self {
            seg_mass: 0.0,
            transversal: 0.0,
            delta_f: vec![0.0; n],
            profile: vec![0.0; taus],
            std_errors: None,
        }
    }

    pub fn delta_f_norm(&self) -> f64 {
        self.delta_f.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Closed(ClosedForm),
    Exact(Box<Exact2D>),
    Mc { budget: u64, seed: u64 },
}

/// A measure bound to a backend.
#[derive(Debug, Clone)]
pub struct Evaluator {
    nu: Arc<HyperplaneMeasure>,
    backend: Backend,
    engine: Engine,
}

impl Evaluator {
    pub fn new(nu: Arc<HyperplaneMeasure>, backend: Backend) -> Result<Self> {
        let engine = match backend {
            Backend::ClosedForm => Engine::Closed(ClosedForm::new(&nu)?),
            Backend::Exact2D => Engine::Exact(Box::new(Exact2D::new(&nu)?)),
            Backend::MonteCarlo { budget, seed } => Engine::Mc { budget, seed },
        };
        Ok(Self { nu, backend, engine })
    }

    /// Closed form when available, else exact planar integration, else Monte
    /// Carlo with [`DEFAULT_MC_BUDGET`].
    pub fn best(nu: Arc<HyperplaneMeasure>) -> Result<Self> {
        Self::new(nu.clone(), best_backend(&nu))
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn measure(&self) -> &Arc<HyperplaneMeasure> {
        &self.nu
    }

    fn check(&self, x: &Point, y: &Point) -> Result<()> {
        check_dim(self.nu.dim(), x.dim())?;
        check_dim(self.nu.dim(), y.dim())?;
        self.nu.check_segment_clear(x, y)
    }

    /// Joint evaluation of the segment integrals of `[x, y]`.
    pub fn pair(&self, x: &Point, y: &Point, taus: &[f64]) -> Result<PairQuantities> {
        self.check(x, y)?;
        match &self.engine {
            Engine::Closed(c) => c.pair(x, y, taus),
            Engine::Exact(e) => e.pair(x, y, taus),
            Engine::Mc { budget, seed } => {
                let q = McQuery::Pair {
                    x: x.clone(),
                    y: y.clone(),
                    taus: taus.to_vec(),
                };
                let est = mc_estimate(&self.nu, &q, *budget, *seed)?;
                let n = x.dim();
                Ok(PairQuantities {
                    seg_mass: est.values[0],
                    transversal: est.values[1],
                    delta_f: est.values[2..2 + n].to_vec(),
                    profile: est.values[2 + n..].to_vec(),
                    std_errors: Some(est.std_errors),
                })
            }
        }
    }

    /// `d_ν(x, y) = ν(π[x,y])`.
    pub fn seg_mass(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.pair(x, y, &[])?.seg_mass)
    }

    /// `∫_{π[x,y]} sin α(x - y, H) dν(H)`.
    pub fn transversal(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.pair(x, y, &[])?.transversal)
    }

    /// `ν{H ∈ π[x,y] : α(x - y, H) >= τ}` for each `τ`.
    pub fn angle_profile(&self, x: &Point, y: &Point, taus: &[f64]) -> Result<Vec<f64>> {
        Ok(self.pair(x, y, taus)?.profile)
    }

    /// `f_ν(x)` with basepoint `o`.
    pub fn embed(&self, o: &Point, x: &Point) -> Result<Vector> {
        if o == x {
            self.check(o, x)?;
            return Ok(Vector::zeros(x.dim()));
        }
        Ok(Vector::from_vec(self.pair(x, o, &[])?.delta_f))
    }

    /// `ν(π B)`.
    pub fn box_mass(&self, b: &BoxRegion) -> Result<f64> {
        check_dim(self.nu.dim(), b.dim())?;
        match &self.engine {
            Engine::Closed(c) => c.box_mass(b),
            Engine::Exact(e) => e.box_mass(b),
            Engine::Mc { budget, seed } => {
                Ok(mc_estimate(&self.nu, &McQuery::BoxMass(b.clone()), *budget, *seed)?.value())
            }
        }
    }

    /// `ν(π Q)`.
    pub fn cube_mass(&self, q: &Cube) -> Result<f64> {
        self.box_mass(&q.as_box())
    }
}

pub fn best_backend(nu: &HyperplaneMeasure) -> Backend {
    if ClosedForm::new(nu).is_ok() {
        Backend::ClosedForm
    } else if Exact2D::new(nu).is_ok() {
        Backend::Exact2D
    } else {
        Backend::MonteCarlo {
            budget: DEFAULT_MC_BUDGET,
            seed: 0,
        }
    }
}

/// `d_ν(x, y)` with the best exact backend.
pub fn seg_mass(nu: &Arc<HyperplaneMeasure>, x: &Point, y: &Point) -> Result<f64> {
    Evaluator::best(nu.clone())?.seg_mass(x, y)
}

/// `∫ sin α dν` over `π[x,y]` with the best exact backend.
pub fn transversal_integral(nu: &Arc<HyperplaneMeasure>, x: &Point, y: &Point) -> Result<f64> {
    Evaluator::best(nu.clone())?.transversal(x, y)
}

/// `ν(πQ)` with the best exact backend.
pub fn cube_mass(nu: &Arc<HyperplaneMeasure>, q: &Cube) -> Result<f64> {
    Evaluator::best(nu.clone())?.cube_mass(q)
}

/// The map `f_ν` with a fixed basepoint.
#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    evaluator: Evaluator,
    basepoint: Point,
}

impl EmbeddingMap {
    pub fn new(nu: Arc<HyperplaneMeasure>, basepoint: Point, backend: Backend) -> Result<Self> {
        check_dim(nu.dim(), basepoint.dim())?;
        if nu.atom_points().iter().any(|(a, _)| *a == basepoint) {
            return Err(Error::DegenerateConfiguration("basepoint coincides with an atom".into()));
        }
        Ok(Self {
            evaluator: Evaluator::new(nu, backend)?,
            basepoint,
        })
    }

    pub fn with_best_backend(nu: Arc<HyperplaneMeasure>, basepoint: Point) -> Result<Self> {
        let b = best_backend(&nu);
        Self::new(nu, basepoint, b)
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn measure(&self) -> &Arc<HyperplaneMeasure> {
        self.evaluator.measure()
    }

    pub fn basepoint(&self) -> &Point {
        &self.basepoint
    }

    pub fn backend(&self) -> Backend {
        self.evaluator.backend()
    }

    /// `f_ν(x)`.
    pub fn eval(&self, x: &Point) -> Result<Vector> {
        self.evaluator.embed(&self.basepoint, x)
    }

    /// `f_ν(x) - f_ν(y)`, integrated directly over `π[x,y]`.
    pub fn difference(&self, x: &Point, y: &Point) -> Result<Vector> {
        Ok(Vector::from_vec(self.evaluator.pair(x, y, &[])?.delta_f))
    }
}

/// `f_ν(x)` for a map.
pub fn embed_eval(f: &EmbeddingMap, x: &Point) -> Result<Vector> {
    f.eval(x)
}
