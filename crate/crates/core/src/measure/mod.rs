//! Base measures μ on ℝⁿ, direction measures ω on the sphere, and the
//! hyperplane measures ν built from them.

pub mod base1d;
pub mod base_nd;
pub mod direction;
mod validate;

use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

pub use base1d::{BaseMeasure1D, DensityPiece};
pub use base_nd::{BaseMeasure, BaseMeasureND, Cell, LineMeasure};
pub use direction::{mean_abs_coordinate, ArcPiece, DirectionMeasure};
pub use validate::{validate, validate_points, PointCheck, ValidationReport};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, BoxRegion, Hyperplane, Point, Vector};

/// Seeded generator of weighted hyperplanes: `E[w φ(H)] = ∫ φ dν`.
pub trait HyperplaneSampler: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> (Hyperplane, f64);
    /// Region outside which the sampler does not promise anything.
    fn bounding_region(&self) -> Option<BoxRegion>;
}

#[derive(Debug, Clone)]
pub enum HyperplaneKind {
    /// `ν = Φ_*(μ × ω)`: the hyperplane through `a ~ μ` with normal `v ~ ω`.
    PositionDirection { mu: BaseMeasure, omega: DirectionMeasure },
    /// `{x : <x, v> = p}` weighted by `dω(v) dρ(p)`.
    OffsetDirection {
        dim: usize,
        omega: DirectionMeasure,
        offsets: BaseMeasure1D,
    },
    Sampler(Arc<dyn HyperplaneSampler>),
}

/// Measure ν on the space of hyperplanes, times a positive scale factor.
#[derive(Debug, Clone)]
pub struct HyperplaneMeasure {
    kind: HyperplaneKind,
    scale: f64,
}

impl HyperplaneMeasure {
    pub fn position_direction(mu: BaseMeasure, omega: DirectionMeasure) -> Result<Self> {
        omega.check(Some(mu.dim()))?;
        Ok(Self {
            kind: HyperplaneKind::PositionDirection { mu, omega },
            scale: 1.0,
        })
    }

    pub fn offset_direction(dim: usize, omega: DirectionMeasure, offsets: BaseMeasure1D) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        omega.check(Some(dim))?;
        Ok(Self {
            kind: HyperplaneKind::OffsetDirection { dim, omega, offsets },
            scale: 1.0,
        })
    }

    pub fn sampler(s: Arc<dyn HyperplaneSampler>) -> Self {
        Self {
            kind: HyperplaneKind::Sampler(s),
            scale: 1.0,
        }
    }

    /// The Crofton measure: uniform normals and offsets with density `c`.
    pub fn crofton(dim: usize, c: f64) -> Result<Self> {
        Self::offset_direction(dim, DirectionMeasure::Uniform, BaseMeasure1D::lebesgue(c)?)
    }

    pub fn kind(&self) -> &HyperplaneKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            HyperplaneKind::PositionDirection { mu, .. } => mu.dim(),
            HyperplaneKind::OffsetDirection { dim, .. } => *dim,
            HyperplaneKind::Sampler(s) => s.dim(),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match &self.kind {
            HyperplaneKind::PositionDirection { .. } => "positionDirection",
            HyperplaneKind::OffsetDirection { .. } => "offsetDirection",
            HyperplaneKind::Sampler(_) => "sampler",
        }
    }

    /// `λ ν`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidMeasure(format!("scale factor must be positive, got {lambda}")));
        }
        Ok(Self {
            kind: self.kind.clone(),
            scale: self.scale * lambda,
        })
    }

    /// Image of ν under `z ↦ z + by`.
    pub fn translated(&self, by: &Vector) -> Result<Self> {
        check_dim(self.dim(), by.len())?;
        let kind = match &self.kind {
            HyperplaneKind::PositionDirection { mu, omega } => HyperplaneKind::PositionDirection {
                mu: mu.translated(by)?,
                omega: omega.clone(),
            },
            HyperplaneKind::OffsetDirection { dim, omega, offsets } => {
                if offsets.lebesgue_density().is_none() {
                    return Err(Error::InvalidMeasure(
                        "only translation-invariant offset densities can be translated".into(),
                    ));
                }
                HyperplaneKind::OffsetDirection {
                    dim: *dim,
                    omega: omega.clone(),
                    offsets: offsets.clone(),
                }
            }
            HyperplaneKind::Sampler(_) => {
                return Err(Error::InvalidMeasure("sampler measures cannot be translated".into()))
            }
        };
        Ok(Self { kind, scale: self.scale })
    }

    /// μ-atoms as points (position-direction measures only).
    pub fn atom_points(&self) -> Vec<(Point, f64)> {
        match &self.kind {
            HyperplaneKind::PositionDirection { mu, .. } => mu.atom_points(),
            _ => vec![],
        }
    }

    /// Errors when a μ-atom lies on the closed segment `[x, y]`.
    pub fn check_segment_clear(&self, x: &Point, y: &Point) -> Result<()> {
        for (a, _) in self.atom_points() {
            if point_on_segment(&a, x, y) {
                return Err(Error::DegenerateConfiguration(format!(
                    "atom at {:?} lies on the segment [{:?}, {:?}]",
                    a.coords(),
                    x.coords(),
                    y.coords()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn point_on_segment(a: &Point, x: &Point, y: &Point) -> bool {
    if a == x || a == y {
        return true;
    }
    let d = y.sub(x);
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return false;
    }
    let p = a.sub(x);
    let t = p.dot(&d) / len2;
    if !(0.0..=1.0).contains(&t) {
        return false;
    }
    let off = (p - d * t).norm();
    off <= 1e-14 * (len2.sqrt() + a.norm())
}

/// `max μ(B(x, 2r)) / μ(B(x, r))` over the given balls; `0/0` is skipped and
/// `m/0` with `m > 0` gives infinity.
pub fn doubling_ratio(m: &BaseMeasureND, balls: &[(Point, f64)]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for (x, r) in balls {
        let inner = m.ball_mass(x, *r)?;
        let outer = m.ball_mass(x, 2.0 * r)?;
        let ratio = if inner > 0.0 {
            outer / inner
        } else if outer > 0.0 {
            f64::INFINITY
        } else {
            continue;
        };
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or(Error::AllSamplesDegenerate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::SamplingPlan;

    fn p(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    #[test]
    fn doubling_lebesgue_is_two_to_the_n() {
        let m = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 100.0).unwrap(), 1.0).unwrap();
        let plan = SamplingPlan::new(BoxRegion::centered_cube(2, 1.0).unwrap(), 1).with_scale_range(0.05, 0.5);
        let r = doubling_ratio(&m, &plan.balls(20)).unwrap();
        assert!((r - 4.0).abs() < 0.02, "{r}");
    }

    #[test]
    fn doubling_at_an_atom_is_one() {
        let m = BaseMeasureND::atomic(vec![(p(&[1.0, 2.0]), 2.0)]).unwrap();
        let balls = vec![(p(&[1.0, 2.0]), 0.1), (p(&[1.0, 2.0]), 3.0)];
        assert_eq!(doubling_ratio(&m, &balls).unwrap(), 1.0);
        let far = vec![(p(&[10.0, 2.0]), 0.1)];
        assert!(matches!(doubling_ratio(&m, &far), Err(Error::AllSamplesDegenerate)));
    }

    #[test]
    fn doubling_linear_density_is_reproducible() {
        // density |x| on [-1,1]² approximated by 16x16 cells
        let k = 16;
        let h = 2.0 / k as f64;
        let mut cells = Vec::new();
        for i in 0..k {
            for j in 0..k {
                let lo = vec![-1.0 + h * i as f64, -1.0 + h * j as f64];
                let hi = vec![lo[0] + h, lo[1] + h];
                let c = [lo[0] + h / 2.0, lo[1] + h / 2.0];
                let density = (c[0] * c[0] + c[1] * c[1]).sqrt();
                cells.push(Cell { region: BoxRegion::new(lo, hi).unwrap(), density });
            }
        }
        let m = BaseMeasureND::new(2, vec![], cells).unwrap();
        let plan = SamplingPlan::new(BoxRegion::centered_cube(2, 0.4).unwrap(), 9).with_scale_range(0.05, 0.3);
        let a = doubling_ratio(&m, &plan.balls(15)).unwrap();
        let b = doubling_ratio(&m, &plan.balls(15)).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite() && a >= 1.0);
    }

    #[test]
    fn segment_atom_detection() {
        let x = p(&[0.0, 0.0]);
        let y = p(&[2.0, 2.0]);
        assert!(point_on_segment(&p(&[1.0, 1.0]), &x, &y));
        assert!(point_on_segment(&p(&[2.0, 2.0]), &x, &y));
        assert!(!point_on_segment(&p(&[3.0, 3.0]), &x, &y));
        assert!(!point_on_segment(&p(&[1.0, 1.1]), &x, &y));
    }
}
