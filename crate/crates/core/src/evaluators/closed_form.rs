use std::f64::consts::{FRAC_PI_2, PI};

use super::PairQuantities;
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Point};
use crate::measure::{mean_abs_coordinate, BaseMeasure, HyperplaneKind, HyperplaneMeasure};

/// Constant of the pushforward kernel:
/// `f(x) = C(n) Σ w [(x-a)/|x-a| - (o-a)/|o-a|]` for uniform normals.
pub fn kmw_constant_analytic(n: usize) -> f64 {
    0.5 * mean_abs_coordinate(n)
}

#[derive(Debug, Clone)]
pub(crate) enum ClosedForm {
    /// Uniform normals, offsets with Lebesgue density `c`.
    Crofton { dim: usize, c: f64 },
    /// Uniform normals through weighted atoms.
    Atoms { dim: usize, atoms: Vec<(Vec<f64>, f64)> },
}

fn unsupported(what: &str) -> Error {
    Error::UnsupportedBackend {
        backend: "closedForm",
        what: what.to_string(),
    }
}

/// Antiderivative of `|cos t|`.
fn abs_cos_integral(t: f64) -> f64 {
    let k = (t / PI + 0.5).floor();
    let sign = if (k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    2.0 * k + sign * t.sin()
}

/// Antiderivative of the indicator of `|cos t| >= cos(half)`.
fn window_integral(t: f64, half: f64) -> f64 {
    let k = ((t + FRAC_PI_2) / PI).floor();
    let r = t - k * PI;
    k * 2.0 * half + r.clamp(-half, half) + half
}

/// Antiderivative of `(1 - sin²τ / cos²t)₊^{1/2}`, the fraction of uniform
/// normals in `S²` with `|<u, v>| >= sin τ` whose in-plane angle to `u` is `t`.
fn lobe_integral_n3(t: f64, tau: f64) -> f64 {
    let (s, c) = tau.sin_cos();
    if c <= 0.0 {
        return 0.0;
    }
    let half = FRAC_PI_2 - tau;
    let lobe = PI * (1.0 - s);
    let k = ((t + FRAC_PI_2) / PI).floor();
    let r = (t - k * PI).clamp(-half, half);
    let mut f = (r.sin() / c).clamp(-1.0, 1.0).asin();
    if s > 0.0 {
        let d = (r.cos().powi(2) - s * s).max(0.0).sqrt();
        f -= s * (s * r.sin()).atan2(d);
    }
    k * lobe + f + 0.5 * lobe
}

/// `∫_lo^hi (1 - sin²τ / cos²t)₊^{(n-2)/2} dt`.
fn lobe_integral(n: usize, lo: f64, hi: f64, tau: f64) -> f64 {
    match n {
        2 => window_integral(hi, FRAC_PI_2 - tau) - window_integral(lo, FRAC_PI_2 - tau),
        3 => lobe_integral_n3(hi, tau) - lobe_integral_n3(lo, tau),
        _ => {
            let s2 = tau.sin().powi(2);
            let e = 0.5 * (n as f64 - 2.0);
            let half = FRAC_PI_2 - tau;
            let mut f = |t: f64| {
                let c2 = t.cos().powi(2);
                [if c2 > s2 { (1.0 - s2 / c2).powf(e) } else { 0.0 }]
            };
            let mut cuts = vec![lo, hi];
            let mut k = ((lo + FRAC_PI_2) / PI).floor() - 1.0;
            while k * PI - half <= hi {
                cuts.extend([k * PI - half, k * PI + half, k * PI + FRAC_PI_2]);
                k += 1.0;
            }
            cuts.retain(|c| (lo..=hi).contains(c));
            cuts.sort_by(f64::total_cmp);
            cuts.windows(2).map(|w| crate::quadrature::integrate(w[0], w[1], &mut f)[0]).sum()
        }
    }
}

/// Angle between `p` and `q`, accurate for nearly parallel vectors.
pub(crate) fn angle_between(p: &[f64], q: &[f64]) -> f64 {
    let np = p.iter().map(|c| c * c).sum::<f64>().sqrt();
    let nq = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut diff = 0.0;
    let mut sum = 0.0;
    for i in 0..p.len() {
        let a = p[i] / np;
        let b = q[i] / nq;
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

impl ClosedForm {
    pub(crate) fn new(nu: &HyperplaneMeasure) -> Result<Self> {
        match nu.kind() {
            HyperplaneKind::OffsetDirection { dim, omega, offsets } if omega.is_uniform() => {
                let c = offsets
                    .lebesgue_density()
                    .ok_or_else(|| unsupported("non-constant offset densities"))?;
                Ok(Self::Crofton {
                    dim: *dim,
                    c: c * nu.scale(),
                })
            }
            HyperplaneKind::PositionDirection {
                mu: BaseMeasure::Spatial(m),
                omega,
            } if omega.is_uniform() && m.cells().iter().all(|c| c.density == 0.0) => Ok(Self::Atoms {
                dim: m.dim(),
                atoms: m
                    .atoms()
                    .iter()
                    .map(|(a, w)| (a.coords().to_vec(), w * nu.scale()))
                    .collect(),
            }),
            _ => Err(unsupported(&format!("this {} measure", nu.variant_name()))),
        }
    }

    pub(crate) fn pair(&self, x: &Point, y: &Point, taus: &[f64]) -> Result<PairQuantities> {
        let diff = x.sub(y);
        let len = diff.norm();
        match self {
            Self::Crofton { dim, c } => {
                let n = *dim;
                let m1 = mean_abs_coordinate(n);
                Ok(PairQuantities {
                    seg_mass: c * len * m1,
                    transversal: c * len / n as f64,
                    delta_f: diff.iter().map(|d| c * d / n as f64).collect(),
                    profile: taus
                        .iter()
                        .map(|t| c * len * m1 * t.cos().powi(n as i32 - 1))
                        .collect(),
                    std_errors: None,
                })
            }
            Self::Atoms { dim, atoms } => {
                let n = *dim;
                let cn = kmw_constant_analytic(n);
                let mean_r = FRAC_PI_2 * mean_abs_coordinate(n);
                let mut out = PairQuantities::zero(n, taus.len());
                if len == 0.0 {
                    return Ok(out);
                }
                for (a, w) in atoms {
                    let p: Vec<f64> = x.iter().zip(a).map(|(s, t)| s - t).collect();
                    let q: Vec<f64> = y.iter().zip(a).map(|(s, t)| s - t).collect();
                    let np = p.iter().map(|c| c * c).sum::<f64>().sqrt();
                    let nq = q.iter().map(|c| c * c).sum::<f64>().sqrt();
                    for i in 0..n {
                        out.delta_f[i] += w * cn * (p[i] / np - q[i] / nq);
                    }
                    let gamma = angle_between(&p, &q);
                    if gamma == 0.0 {
                        continue;
                    }
                    out.seg_mass += w * gamma / PI;
                    // plane of p and q with p along the first axis and q at angle gamma
                    let e1: Vec<f64> = p.iter().map(|c| c / np).collect();
                    let qe1: f64 = q.iter().zip(&e1).map(|(a, b)| a * b).sum();
                    let mut e2: Vec<f64> = q.iter().zip(&e1).map(|(a, b)| a - qe1 * b).collect();
                    let n2 = e2.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if n2 == 0.0 {
                        continue;
                    }
                    e2.iter_mut().for_each(|c| *c /= n2);
                    let u1: f64 = diff.iter().zip(&e1).map(|(a, b)| a * b).sum();
                    let u2: f64 = diff.iter().zip(&e2).map(|(a, b)| a * b).sum();
                    let psi = u2.atan2(u1);
                    let (lo, hi) = (FRAC_PI_2 - psi, FRAC_PI_2 + gamma - psi);
                    out.transversal +=
                        w * mean_r / PI * (abs_cos_integral(hi) - abs_cos_integral(lo));
                    for (k, tau) in taus.iter().enumerate() {
                        out.profile[k] += w / PI * lobe_integral(n, lo, hi, *tau);
                    }
                }
                Ok(out)
            }
        }
    }

    pub(crate) fn box_mass(&self, b: &BoxRegion) -> Result<f64> {
        match self {
            Self::Crofton { dim, c } => {
                let m1 = mean_abs_coordinate(*dim);
                Ok(c * m1 * (0..*dim).map(|i| b.width(i)).sum::<f64>())
            }
            Self::Atoms { dim, atoms } => {
                if *dim != 2 {
                    return Err(unsupported("box masses of atoms for n >= 3"));
                }
                let verts = b.vertices();
                let mut total = 0.0;
                for (a, w) in atoms {
                    let inside = (0..2).all(|i| b.lo()[i] <= a[i] && a[i] <= b.hi()[i]);
                    if inside {
                        total += w;
                        continue;
                    }
                    let rel: Vec<Vec<f64>> = verts
                        .iter()
                        .map(|v| v.iter().zip(a).map(|(s, t)| s - t).collect())
                        .collect();
                    let mut widest: f64 = 0.0;
                    for i in 0..rel.len() {
                        for j in i + 1..rel.len() {
                            widest = widest.max(angle_between(&rel[i], &rel[j]));
                        }
                    }
                    total += w * widest / PI;
                }
                Ok(total)
            }
        }
    }
}
