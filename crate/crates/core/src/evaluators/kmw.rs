use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::closed_form::kmw_constant_analytic;
use super::monte_carlo::{mc_estimate, McQuery};
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Hyperplane, Point, Vector};
use crate::measure::direction::sample_sphere;
use crate::measure::{HyperplaneMeasure, HyperplaneSampler};

/// Query distances `|x|` used by the calibration fit.
pub const CALIBRATION_RADII: [f64; 3] = [2.0, 5.0, 10.0];
/// Radius of the uniform ball carrying μ during calibration.
pub const CALIBRATION_BALL_RADIUS: f64 = 0.01;
/// Below this many samples per grid point the independence check is skipped.
pub const MIN_SAMPLES_PER_POINT: u64 = 1000;

/// Hyperplanes through a uniform point of a ball with a uniform normal.
#[derive(Debug, Clone)]
pub struct BallPushforward {
    center: Vec<f64>,
    radius: f64,
    reach: f64,
}

impl BallPushforward {
    pub fn new(center: Vec<f64>, radius: f64, reach: f64) -> Result<Self> {
        if center.len() < 2 {
            return Err(Error::InvalidDimension(center.len()));
        }
        if !(radius > 0.0 && reach > radius) {
            return Err(Error::InvalidMeasure("ball radius must be positive and below the reach".into()));
        }
        Ok(Self { center, radius, reach })
    }
}

impl HyperplaneSampler for BallPushforward {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Hyperplane, f64) {
        let n = self.center.len();
        let mut d = vec![0.0; n];
        sample_sphere(rng, &mut d);
        let r = self.radius * rng.random::<f64>().powf(1.0 / n as f64);
        let a: Vec<f64> = self.center.iter().zip(&d).map(|(c, e)| c + r * e).collect();
        let mut v = vec![0.0; n];
        sample_sphere(rng, &mut v);
        let offset: f64 = a.iter().zip(&v).map(|(p, q)| p * q).sum();
        let h = Hyperplane::new(Vector::from_vec(v), offset).expect("unit normal");
        (h, 1.0)
    }

    fn bounding_region(&self) -> Option<BoxRegion> {
        let lo = self.center.iter().map(|c| c - self.reach).collect();
        let hi = self.center.iter().map(|c| c + self.reach).collect();
        BoxRegion::new(lo, hi).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Provenance {
    OracleEstimated,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KmwGridFit {
    pub radius: f64,
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// The constant `C(n)` in `f(x) = C(n) Σ w [(x-a)/|x-a| - (o-a)/|o-a|]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KmwConstant {
    pub n: usize,
    pub value: f64,
    pub std_error: f64,
    /// `value ± 4 std_error`.
    pub ci: (f64, f64),
    pub provenance: Provenance,
    #[serde(default)]
    pub grid: Vec<KmwGridFit>,
    /// Whether the fitted values agree across `|x|`; `None` when skipped.
    #[serde(default)]
    pub independence_check: Option<bool>,
    #[serde(default)]
    pub warning: Option<String>,
    #[serde(default)]
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
}

impl KmwConstant {
    pub fn analytic(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let v = kmw_constant_analytic(n);
        Ok(Self {
            n,
            value: v,
            std_error: 0.0,
            ci: (v, v),
            provenance: Provenance::Analytic,
            grid: vec![],
            independence_check: None,
            warning: None,
            budget: 0,
            seed: 0,
        })
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.ci.0 <= v && v <= self.ci.1
    }
}

fn grid_seed(seed: u64, k: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1)
}

/// Oracle estimate of `C(n)` without failing on an inconsistent fit; the
/// outcome is recorded in `independence_check`.
pub fn calibrate_kmw_constant_unchecked(n: usize, budget: u64, seed: u64) -> Result<KmwConstant> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let sampler = BallPushforward::new(vec![0.0; n], CALIBRATION_BALL_RADIUS, 100.0)?;
    let nu = Arc::new(HyperplaneMeasure::sampler(Arc::new(sampler)));
    let o = Point::origin(n)?;
    let per = budget / CALIBRATION_RADII.len() as u64;
    let mut grid = Vec::new();
    for (k, &s) in CALIBRATION_RADII.iter().enumerate() {
        let mut x = vec![0.0; n];
        x[0] = s;
        let q = McQuery::Embed {
            o: o.clone(),
            x: Point::new(x)?,
        };
        let est = mc_estimate(&nu, &q, per, grid_seed(seed, k))?;
        grid.push(KmwGridFit {
            radius: s,
            value: est.values[0],
            std_error: est.std_errors[0],
            samples: est.samples,
        });
    }
    let low = grid.iter().any(|g| g.samples < MIN_SAMPLES_PER_POINT);
    let weighted = grid.iter().all(|g| g.std_error > 0.0 && g.std_error.is_finite());
    let (value, std_error) = if weighted {
        let wsum: f64 = grid.iter().map(|g| 1.0 / (g.std_error * g.std_error)).sum();
        let v = grid.iter().map(|g| g.value / (g.std_error * g.std_error)).sum::<f64>() / wsum;
        (v, 1.0 / wsum.sqrt())
    } else {
        let v = grid.iter().map(|g| g.value).sum::<f64>() / grid.len() as f64;
        (v, f64::INFINITY)
    };
    let (independence_check, warning) = if low {
        (
            None,
            Some(format!(
                "fewer than {MIN_SAMPLES_PER_POINT} samples per grid point; independence check skipped"
            )),
        )
    } else {
        let ok = grid.iter().enumerate().all(|(i, a)| {
            grid[i + 1..].iter().all(|b| {
                let tol = 4.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
                (a.value - b.value).abs() <= tol
            })
        });
        (Some(ok), None)
    };
    Ok(KmwConstant {
        n,
        value,
        std_error,
        ci: (value - 4.0 * std_error, value + 4.0 * std_error),
        provenance: Provenance::OracleEstimated,
        grid,
        independence_check,
        warning,
        budget,
        seed,
    })
}

/// Estimates `C(n)` by Monte Carlo evaluation of `f_ν` for a tiny uniform ball
/// at the basepoint, at `|x| ∈ {2, 5, 10}`, and checks that the fits agree
/// within 4 combined standard errors.
pub fn calibrate_kmw_constant(n: usize, budget: u64, seed: u64) -> Result<KmwConstant> {
    let c = calibrate_kmw_constant_unchecked(n, budget, seed)?;
    if c.independence_check == Some(false) {
        let fits: Vec<String> = c
            .grid
            .iter()
            .map(|g| format!("|x|={}: {} ± {}", g.radius, g.value, g.std_error))
            .collect();
        return Err(Error::FitInconsistent(fits.join(", ")));
    }
    Ok(c)
}
