use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HyperplaneKind, HyperplaneMeasure};
use crate::error::{Error, Result};
use crate::evaluators::{best_backend, mc_estimate, Backend, Evaluator, McQuery, DEFAULT_MC_BUDGET};
use crate::geometry::{BoxRegion, Point};
use crate::plan::{SamplingPlan, STREAM_VALIDATION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointCheck {
    pub point: Point,
    /// Estimated `ν(π{x})`.
    pub mass: f64,
    pub violation: bool,
}

/// Statistical admissibility check. It can find violations but never proves
/// their absence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub points: Vec<PointCheck>,
    pub min_segment_mass: f64,
    pub min_segment: Option<(Point, Point)>,
    pub region_mass: f64,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn verdict(&self) -> String {
        if self.passed() {
            "no violation found".to_string()
        } else {
            format!("{} violation(s): {}", self.violations.len(), self.violations.join("; "))
        }
    }
}

/// Estimates `ν(π{x})` at each point. For position-direction measures a point
/// sitting on a μ-atom is met by every hyperplane through the atom.
pub fn validate_points(nu: &Arc<HyperplaneMeasure>, points: &[Point]) -> Result<Vec<PointCheck>> {
    let eval = Evaluator::best(nu.clone())?;
    let atoms = nu.atom_points();
    let omega_mass = match nu.kind() {
        HyperplaneKind::PositionDirection { omega, .. } => omega.total_mass(),
        _ => 0.0,
    };
    points
        .par_iter()
        .map(|x| {
            let atom: f64 = atoms.iter().filter(|(a, _)| a == x).map(|(_, w)| w).sum();
            if atom > 0.0 {
                return Ok(PointCheck {
                    point: x.clone(),
                    mass: atom * omega_mass * nu.scale(),
                    violation: true,
                });
            }
            let eps = 1e-9 * (1.0 + x.norm());
            let mut shifted = x.coords().to_vec();
            shifted[0] += eps;
            let y = Point::new(shifted)?;
            let mass = eval.seg_mass(x, &y).unwrap_or(0.0);
            Ok(PointCheck {
                point: x.clone(),
                mass,
                violation: false,
            })
        })
        .collect()
}

/// Checks the three admissibility conditions on `region`: points carry no
/// mass, sampled segments carry positive mass, and `ν(π region)` is finite.
/// Atoms of μ inside the region are always among the checked points.
pub fn validate(nu: &Arc<HyperplaneMeasure>, region: &BoxRegion, plan: &SamplingPlan) -> Result<ValidationReport> {
    if let HyperplaneKind::Sampler(s) = nu.kind() {
        if s.bounding_region().is_none() {
            return Err(Error::MissingBoundingRegion);
        }
    }
    let count = plan.pair_count.clamp(2, 200);
    let mut points = plan.points(STREAM_VALIDATION, count);
    let sampled = points.clone();
    points.extend(
        nu.atom_points()
            .into_iter()
            .map(|(a, _)| a)
            .filter(|a| region.contains(a)),
    );
    let checks = validate_points(nu, &points)?;
    let mut violations: Vec<String> = checks
        .iter()
        .filter(|c| c.violation)
        .map(|c| format!("point {:?} carries mass {}", c.point.coords(), c.mass))
        .collect();

    let eval = Evaluator::best(nu.clone())?;
    let segs: Vec<(Point, Point)> = sampled.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let masses: Vec<Result<f64>> = segs.par_iter().map(|(x, y)| eval.seg_mass(x, y)).collect();
    let mut min_mass = f64::INFINITY;
    let mut min_seg = None;
    for ((x, y), m) in segs.iter().zip(masses) {
        match m {
            Ok(m) => {
                if m < min_mass {
                    min_mass = m;
                    min_seg = Some((x.clone(), y.clone()));
                }
                if !(m > 0.0) {
                    violations.push(format!("segment [{:?}, {:?}] has zero mass", x.coords(), y.coords()));
                }
            }
            Err(e) => violations.push(format!("segment [{:?}, {:?}]: {e}", x.coords(), y.coords())),
        }
    }

    let region_mass = match eval.box_mass(region) {
        Ok(m) => m,
        Err(Error::UnsupportedBackend { .. }) => {
            let seed = match best_backend(nu) {
                Backend::MonteCarlo { seed, .. } => seed,
                _ => plan.seed,
            };
            mc_estimate(nu, &McQuery::BoxMass(region.clone()), DEFAULT_MC_BUDGET, seed)?.value()
        }
        Err(e) => return Err(e),
    };
    if !region_mass.is_finite() {
        violations.push("region mass is not finite".to_string());
    }
    Ok(ValidationReport {
        points: checks,
        min_segment_mass: min_mass,
        min_segment: min_seg,
        region_mass,
        violations,
    })
}
