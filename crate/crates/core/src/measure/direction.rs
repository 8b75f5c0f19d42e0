use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant projective density on the angle interval `[lo, hi) ⊂ [0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcPiece {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// Antipodally symmetric measure ω on the unit sphere.
///
/// For `n = 2` every variant is described on the projective angle
/// `φ ∈ [0, π)`, where the density at `φ` accounts for both `v(φ)` and
/// `-v(φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum DirectionMeasure {
    /// Normalized volume (total mass 1).
    Uniform,
    /// Two-sided cap `{v : |<v, axis>| >= cos θ₀}` with uniform weighting and
    /// the given total mass.
    #[serde(rename_all = "camelCase")]
    SymmetricCap {
        axis: Vec<f64>,
        half_angle: f64,
        total_mass: f64,
    },
    /// Piecewise constant projective density (n = 2 only). Overlapping pieces
    /// add up.
    ArcDensity2D { pieces: Vec<ArcPiece> },
}

pub(crate) fn wrap_pi(phi: f64) -> f64 {
    let r = phi.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// `E|v₁|` for `v` uniform on `Sⁿ⁻¹`.
pub fn mean_abs_coordinate(n: usize) -> f64 {
    let (mut m, mut k) = if n.is_multiple_of(2) { (2.0 / PI, 2) } else { (0.5, 3) };
    while k < n {
        m *= k as f64 / (k + 1) as f64;
        k += 2;
    }
    m
}

impl DirectionMeasure {
    pub fn symmetric_cap(axis: Vec<f64>, half_angle: f64, total_mass: f64) -> Result<Self> {
        let d = Self::SymmetricCap {
            axis,
            half_angle,
            total_mass,
        };
        d.check(None)?;
        Ok(d)
    }

    pub fn arc_density(pieces: Vec<ArcPiece>) -> Result<Self> {
        let d = Self::ArcDensity2D { pieces };
        d.check(Some(2))?;
        Ok(d)
    }

    /// Validates the variant, and its dimension when `dim` is given.
    pub fn check(&self, dim: Option<usize>) -> Result<()> {
        match self {
            Self::Uniform => {}
            Self::SymmetricCap {
                axis,
                half_angle,
                total_mass,
            } => {
                if let Some(n) = dim {
                    crate::geometry::check_dim(n, axis.len())?;
                }
                let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !(norm > 0.0) || axis.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidMeasure("cap axis must be a nonzero vector".into()));
                }
                if !(*half_angle > 0.0 && *half_angle <= FRAC_PI_2) {
                    return Err(Error::InvalidMeasure(format!(
                        "cap half-angle {half_angle} outside (0, π/2]"
                    )));
                }
                if !(*total_mass > 0.0 && total_mass.is_finite()) {
                    return Err(Error::InvalidMeasure("cap mass must be positive".into()));
                }
            }
            Self::ArcDensity2D { pieces } => {
                if let Some(n) = dim {
                    if n != 2 {
                        return Err(Error::InvalidMeasure("arc densities exist only for n = 2".into()));
                    }
                }
                for p in pieces {
                    if !(0.0 <= p.lo && p.lo < p.hi && p.hi <= PI) {
                        return Err(Error::InvalidMeasure(format!(
                            "arc piece [{}, {}) outside [0, π]",
                            p.lo, p.hi
                        )));
                    }
                    if !p.density.is_finite() || p.density < 0.0 {
                        return Err(Error::InvalidMeasure("bad arc density".into()));
                    }
                }
                if !(self.total_mass() > 0.0) {
                    return Err(Error::InvalidMeasure("arc density has zero mass".into()));
                }
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::SymmetricCap { total_mass, .. } => *total_mass,
            Self::ArcDensity2D { pieces } => pieces.iter().map(|p| p.density * (p.hi - p.lo)).sum(),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Self::Uniform)
    }

    /// Pieces of the projective density on `[0, π)` (n = 2).
    pub fn projective_pieces(&self) -> Vec<ArcPiece> {
        match self {
            Self::Uniform => vec![ArcPiece {
                lo: 0.0,
                hi: PI,
                density: 1.0 / PI,
            }],
            Self::SymmetricCap {
                axis,
                half_angle,
                total_mass,
            } => {
                let density = total_mass / (2.0 * half_angle);
                if *half_angle >= FRAC_PI_2 {
                    return vec![ArcPiece { lo: 0.0, hi: PI, density }];
                }
                let c = wrap_pi(axis[1].atan2(axis[0]));
                let (lo, hi) = (c - half_angle, c + half_angle);
                let mut out = Vec::new();
                if lo < 0.0 {
                    out.push(ArcPiece { lo: 0.0, hi, density });
                    out.push(ArcPiece { lo: lo + PI, hi: PI, density });
                } else if hi > PI {
                    out.push(ArcPiece { lo, hi: PI, density });
                    out.push(ArcPiece { lo: 0.0, hi: hi - PI, density });
                } else {
                    out.push(ArcPiece { lo, hi, density });
                }
                out
            }
            Self::ArcDensity2D { pieces } => pieces.clone(),
        }
    }

    /// Projective density at `φ` (n = 2).
    pub fn projective_density(&self, phi: f64) -> f64 {
        let phi = wrap_pi(phi);
        self.projective_pieces()
            .iter()
            .filter(|p| p.lo <= phi && phi < p.hi)
            .map(|p| p.density)
            .sum()
    }

    /// Angles in `[0, π]` where the projective density may jump (n = 2).
    pub fn breakpoints_2d(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .projective_pieces()
            .iter()
            .flat_map(|p| [p.lo, p.hi])
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Mass of the circular arc `{(cos θ, sin θ) : θ ∈ [a, b]}` (n = 2).
    pub fn sphere_arc_mass(&self, a: f64, b: f64) -> f64 {
        let pieces = self.projective_pieces();
        let full: f64 = pieces.iter().map(|p| p.density * (p.hi - p.lo)).sum();
        let cum = |theta: f64| {
            let k = (theta / PI).floor();
            let r = theta - k * PI;
            let part: f64 = pieces
                .iter()
                .map(|p| p.density * (r.min(p.hi) - p.lo).max(0.0))
                .sum();
            k * full + part
        };
        0.5 * (cum(b) - cum(a))
    }

    /// Draws a unit vector from the normalized measure.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Uniform => sample_sphere(rng, out),
            Self::SymmetricCap { axis, half_angle, .. } => {
                if dim == 2 {
                    let c = axis[1].atan2(axis[0]);
                    let mut phi = c + (2.0 * rng.random::<f64>() - 1.0) * half_angle;
                    if rng.random::<bool>() {
                        phi += PI;
                    }
                    out[0] = phi.cos();
                    out[1] = phi.sin();
                    return;
                }
                let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
                let cos0 = half_angle.cos();
                loop {
                    sample_sphere(rng, out);
                    let d: f64 = out.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>() / norm;
                    if d.abs() >= cos0 {
                        return;
                    }
                }
            }
            Self::ArcDensity2D { pieces } => {
                let total = self.total_mass();
                let mut u = rng.random::<f64>() * total;
                let mut chosen = pieces[pieces.len() - 1];
                for p in pieces {
                    let m = p.density * (p.hi - p.lo);
                    if u < m {
                        chosen = *p;
                        break;
                    }
                    u -= m;
                }
                let mut phi = chosen.lo + rng.random::<f64>() * (chosen.hi - chosen.lo);
                if rng.random::<bool>() {
                    phi += PI;
                }
                out[0] = phi.cos();
                out[1] = phi.sin();
            }
        }
    }
}

pub(crate) fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for c in out.iter_mut() {
            *c = rng.sample(StandardNormal);
            s += *c * *c;
        }
        if s > 1e-300 {
            let inv = 1.0 / s.sqrt();
            out.iter_mut().for_each(|c| *c *= inv);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_abs_coordinate_values() {
        assert!((mean_abs_coordinate(2) - 2.0 / PI).abs() < 1e-16);
        assert_eq!(mean_abs_coordinate(3), 0.5);
        assert!((mean_abs_coordinate(4) - 4.0 / (3.0 * PI)).abs() < 1e-16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut v = [0.0; 5];
        let n = 200_000;
        let mean: f64 = (0..n)
            .map(|_| {
                sample_sphere(&mut rng, &mut v);
                v[0].abs()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - mean_abs_coordinate(5)).abs() < 4.0 * 0.3 / (n as f64).sqrt());
    }

    #[test]
    fn cap_pieces_wrap() {
        let cap = DirectionMeasure::symmetric_cap(vec![1.0, 0.0], PI / 6.0, PI / 3.0).unwrap();
        assert!((cap.projective_density(0.1) - 1.0).abs() < 1e-15);
        assert!((cap.projective_density(PI - 0.1) - 1.0).abs() < 1e-15);
        assert_eq!(cap.projective_density(FRAC_PI_2), 0.0);
        assert!((cap.sphere_arc_mass(0.0, 2.0 * PI) - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn full_cap_is_uniform_density() {
        let cap = DirectionMeasure::symmetric_cap(vec![0.0, 1.0], FRAC_PI_2, 1.0).unwrap();
        assert!((cap.projective_density(0.3) - 1.0 / PI).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_caps() {
        assert!(DirectionMeasure::symmetric_cap(vec![1.0, 0.0], 0.0, 1.0).is_err());
        assert!(DirectionMeasure::symmetric_cap(vec![0.0, 0.0], 0.1, 1.0).is_err());
        assert!(DirectionMeasure::arc_density(vec![ArcPiece { lo: 1.0, hi: 4.0, density: 1.0 }]).is_err());
    }

    #[test]
    fn cap_samples_respect_half_angle() {
        let cap = DirectionMeasure::symmetric_cap(vec![0.0, 0.0, 1.0], 0.3, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut v = [0.0; 3];
        for _ in 0..1000 {
            cap.sample(3, &mut rng, &mut v);
            assert!(v[2].abs() >= 0.3f64.cos() - 1e-12);
        }
    }

    fn direction() -> impl Strategy<Value = DirectionMeasure> {
        prop_oneof![
            Just(DirectionMeasure::Uniform),
            (0.0..PI, 0.01..FRAC_PI_2, 0.1..3.0f64).prop_map(|(a, h, m)| {
                DirectionMeasure::symmetric_cap(vec![a.cos(), a.sin()], h, m).unwrap()
            }),
            prop::collection::vec((0.0..PI, 0.0..1.0f64, 0.0..2.0f64), 1..5).prop_map(|v| {
                let pieces = v
                    .into_iter()
                    .map(|(lo, f, d)| ArcPiece { lo, hi: lo + f * (PI - lo) + 1e-9, density: d + 0.01 })
                    .map(|p| ArcPiece { hi: p.hi.min(PI), ..p })
                    .collect();
                DirectionMeasure::ArcDensity2D { pieces }
            }),
        ]
    }

    proptest! {
        #[test]
        fn antipodal_symmetry(d in direction(), a in -7.0..7.0f64, len in 0.0..7.0f64) {
            let m = d.sphere_arc_mass(a, a + len);
            let anti = d.sphere_arc_mass(a + PI, a + len + PI);
            prop_assert!((m - anti).abs() <= 1e-12 * (1.0 + m));
            prop_assert!(m >= -1e-15);
        }

        #[test]
        fn full_circle_is_total_mass(d in direction(), a in -7.0..7.0f64) {
            let m = d.sphere_arc_mass(a, a + 2.0 * PI);
            prop_assert!((m - d.total_mass()).abs() <= 1e-12 * (1.0 + m));
        }
    }
}
