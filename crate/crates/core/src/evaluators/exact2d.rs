//! Exact planar evaluation: integrate over the projective normal angle
//! `φ ∈ [0, π)` the ω-density times the μ-mass of the slab of positions whose
//! hyperplane with normal `v(φ)` meets the query set.
//!
//! The slab mass is piecewise smooth in `φ` with kinks exactly where a μ-feature
//! (atom, cell corner, line-measure edge) and a query point lie on a common
//! hyperplane, so those directions are used as panel breakpoints.

use std::f64::consts::{FRAC_PI_2, PI};

use super::PairQuantities;
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Point};
use crate::measure::direction::wrap_pi;
use crate::measure::{ArcPiece, BaseMeasure, BaseMeasure1D, HyperplaneKind, HyperplaneMeasure};
use crate::quadrature::integrate;

#[derive(Debug, Clone)]
struct PlanarCell {
    lo: [f64; 2],
    hi: [f64; 2],
    mass: f64,
}

#[derive(Debug, Clone)]
enum Slab {
    Spatial {
        atoms: Vec<([f64; 2], f64)>,
        cells: Vec<PlanarCell>,
    },
    Line {
        base: [f64; 2],
        dir: [f64; 2],
        measure: BaseMeasure1D,
    },
    Offset {
        measure: BaseMeasure1D,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Exact2D {
    slab: Slab,
    omega: Vec<ArcPiece>,
    /// Angles fixed by ω and by the cell shapes.
    static_breaks: Vec<f64>,
    features: Vec<[f64; 2]>,
    offset_features: Vec<f64>,
    atoms: Vec<[f64; 2]>,
    scale: f64,
}

fn xy(p: &Point) -> [f64; 2] {
    [p[0], p[1]]
}

fn perp_angle(d: [f64; 2]) -> Option<f64> {
    if d == [0.0, 0.0] {
        None
    } else {
        Some(wrap_pi(d[1].atan2(d[0]) + FRAC_PI_2))
    }
}

/// `P(lo <= Z <= hi)` where `Z` is the sum of uniforms on `[0, a]` and `[0, b]`
/// shifted by `zmin`. `width` is `hi - lo` computed directly by the caller; it
/// is used whenever the window sits inside one piece of the density, which
/// keeps the result accurate relative to its own size.
fn trapezoid_prob(zmin: f64, a: f64, b: f64, lo: f64, hi: f64, width: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    if a == 0.0 {
        return if lo <= zmin && zmin <= hi { 1.0 } else { 0.0 };
    }
    let (tl, th) = (lo - zmin, hi - zmin);
    let (start, stop) = (tl.max(0.0), th.min(a + b));
    if stop <= start {
        return 0.0;
    }
    // split the window across rising, flat and falling pieces so the piece
    // widths always sum to `width`
    let mut left = if start == tl && stop == th { width } else { stop - start };
    let mut l = start;
    let mut p = 0.0;
    for (k, to) in [b, a, a + b].into_iter().enumerate() {
        if l >= to || left <= 0.0 {
            continue;
        }
        let w = if l + left <= to { left } else { to - l };
        let h = l + w;
        p += match k {
            0 => w * (h + l) / (2.0 * a * b),
            1 => w / a,
            _ => w * ((a + b - l) + (a + b - h)) / (2.0 * a * b),
        };
        left -= w;
        l = h;
    }
    p.clamp(0.0, 1.0)
}

fn unsupported(what: &str) -> Error {
    Error::UnsupportedBackend {
        backend: "exact2d",
        what: what.to_string(),
    }
}

impl Exact2D {
    pub(crate) fn new(nu: &HyperplaneMeasure) -> Result<Self> {
        if nu.dim() != 2 {
            return Err(unsupported("dimensions other than 2"));
        }
        let (slab, omega) = match nu.kind() {
            HyperplaneKind::PositionDirection { mu, omega } => {
                let slab = match mu {
                    BaseMeasure::Spatial(m) => Slab::Spatial {
                        atoms: m.atoms().iter().map(|(a, w)| (xy(a), *w)).collect(),
                        cells: m
                            .cells()
                            .iter()
                            .filter(|c| c.density > 0.0)
                            .map(|c| PlanarCell {
                                lo: [c.region.lo()[0], c.region.lo()[1]],
                                hi: [c.region.hi()[0], c.region.hi()[1]],
                                mass: c.mass(),
                            })
                            .collect(),
                    },
                    BaseMeasure::Line(l) => Slab::Line {
                        base: xy(l.base()),
                        dir: [l.direction()[0], l.direction()[1]],
                        measure: l.measure().clone(),
                    },
                };
                (slab, omega)
            }
            HyperplaneKind::OffsetDirection { omega, offsets, .. } => (
                Slab::Offset {
                    measure: offsets.clone(),
                },
                omega,
            ),
            HyperplaneKind::Sampler(_) => return Err(unsupported("sampler measures")),
        };
        let mut static_breaks = omega.breakpoints_2d();
        let mut features = Vec::new();
        let mut offset_features = Vec::new();
        match &slab {
            Slab::Spatial { atoms, cells } => {
                features.extend(atoms.iter().map(|a| a.0));
                for c in cells {
                    for mask in 0..4 {
                        features.push([
                            if mask & 1 == 1 { c.hi[0] } else { c.lo[0] },
                            if mask & 2 == 2 { c.hi[1] } else { c.lo[1] },
                        ]);
                    }
                    let (w0, w1) = (c.hi[0] - c.lo[0], c.hi[1] - c.lo[1]);
                    if w0 > 0.0 && w1 > 0.0 {
                        let d = w0.atan2(w1);
                        static_breaks.extend([d, PI - d]);
                    }
                }
                if !cells.is_empty() {
                    static_breaks.extend([0.0, FRAC_PI_2, PI]);
                }
            }
            Slab::Line { base, dir, measure } => {
                for t in measure.features() {
                    features.push([base[0] + t * dir[0], base[1] + t * dir[1]]);
                }
                if let Some(a) = perp_angle(*dir) {
                    static_breaks.push(a);
                }
            }
            Slab::Offset { measure } => {
                offset_features = measure.features();
            }
        }
        let atoms = nu.atom_points().iter().map(|(a, _)| xy(a)).collect();
        Ok(Self {
            slab,
            omega: omega.projective_pieces(),
            static_breaks,
            features,
            offset_features,
            atoms,
            scale: nu.scale(),
        })
    }

    fn density(&self, phi: f64) -> f64 {
        self.omega
            .iter()
            .filter(|p| p.lo <= phi && phi < p.hi)
            .map(|p| p.density)
            .sum()
    }

    /// μ-mass of positions whose hyperplane with normal `(c, s)` has offset in
    /// `[lo, hi]`.
    fn slab_mass(&self, c: f64, s: f64, lo: f64, hi: f64, width: f64) -> f64 {
        match &self.slab {
            Slab::Spatial { atoms, cells } => {
                let mut m = 0.0;
                for (a, w) in atoms {
                    let p = a[0] * c + a[1] * s;
                    if lo <= p && p <= hi {
                        m += w;
                    }
                }
                for cell in cells {
                    let (x0, x1) = (cell.lo[0] * c, cell.hi[0] * c);
                    let (y0, y1) = (cell.lo[1] * s, cell.hi[1] * s);
                    let zmin = x0.min(x1) + y0.min(y1);
                    m += cell.mass * trapezoid_prob(zmin, (x1 - x0).abs(), (y1 - y0).abs(), lo, hi, width);
                }
                m
            }
            Slab::Line { base, dir, measure } => {
                let d = dir[0] * c + dir[1] * s;
                let b = base[0] * c + base[1] * s;
                if d == 0.0 {
                    return if lo <= b && b <= hi { measure.total_mass() } else { 0.0 };
                }
                let (t1, t2) = ((lo - b) / d, (hi - b) / d);
                measure.span_mass(t1.min(t2), t1.max(t2), width / d.abs())
            }
            Slab::Offset { measure } => {
                0.5 * (measure.span_mass(lo, hi, width) + measure.span_mass(-hi, -lo, width))
            }
        }
    }

    fn query_breaks(&self, points: &[[f64; 2]], out: &mut Vec<f64>) {
        for q in points {
            for f in &self.features {
                if let Some(a) = perp_angle([q[0] - f[0], q[1] - f[1]]) {
                    out.push(a);
                }
            }
            let r = q[0].hypot(q[1]);
            if r > 0.0 {
                let th = q[1].atan2(q[0]);
                for &b in &self.offset_features {
                    for b in [b, -b] {
                        if b.abs() <= r {
                            let d = (b / r).acos();
                            out.push(wrap_pi(th + d));
                            out.push(wrap_pi(th - d));
                        }
                    }
                }
            }
        }
    }

    /// Runs `on_panel(a, b, weight)` over the panels of `[0, π]` cut at
    /// `breaks`, skipping panels where ω vanishes.
    fn panels(&self, mut breaks: Vec<f64>, mut on_panel: impl FnMut(f64, f64, f64)) {
        breaks.extend_from_slice(&self.static_breaks);
        breaks.extend([0.0, PI]);
        breaks.retain(|b| (0.0..=PI).contains(b));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let g = self.density(0.5 * (a + b));
            if g > 0.0 {
                on_panel(a, b, g * self.scale);
            }
        }
    }

    fn check_clear(&self, x: [f64; 2], y: [f64; 2]) -> Result<()> {
        for a in &self.atoms {
            let on = if x == y {
                *a == x
            } else {
                let d = [y[0] - x[0], y[1] - x[1]];
                let p = [a[0] - x[0], a[1] - x[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                let t = (p[0] * d[0] + p[1] * d[1]) / len2;
                let cross = (p[0] * d[1] - p[1] * d[0]).abs();
                *a == x || *a == y || ((0.0..=1.0).contains(&t) && cross <= 1e-14 * len2)
            };
            if on {
                return Err(Error::DegenerateConfiguration(format!(
                    "atom at {a:?} lies on the segment [{x:?}, {y:?}]"
                )));
            }
        }
        Ok(())
    }

    /// Joint evaluation of `ν(π[x,y])`, `∫ sin α dν`, `f(x) - f(y)` and the
    /// mass of `{α >= τ}` for each `τ`.
    pub(crate) fn pair(&self, x: &Point, y: &Point, taus: &[f64]) -> Result<PairQuantities> {
        let (x, y) = (xy(x), xy(y));
        self.check_clear(x, y)?;
        let d = [x[0] - y[0], x[1] - y[1]];
        let len = d[0].hypot(d[1]);
        let mut out = PairQuantities::zero(2, taus.len());
        if len == 0.0 {
            return Ok(out);
        }
        let u = [d[0] / len, d[1] / len];
        let psi = u[1].atan2(u[0]);
        let sin_tau: Vec<f64> = taus.iter().map(|t| t.sin()).collect();
        let mut breaks = Vec::new();
        self.query_breaks(&[x, y], &mut breaks);
        breaks.extend(perp_angle(d));
        for t in taus {
            let half = FRAC_PI_2 - t;
            breaks.extend([wrap_pi(psi + half), wrap_pi(psi - half)]);
        }
        let mut f = |phi: f64| {
            let (s, c) = phi.sin_cos();
            let (px, py) = (x[0] * c + x[1] * s, y[0] * c + y[1] * s);
            let m = self.slab_mass(c, s, px.min(py), px.max(py), (d[0] * c + d[1] * s).abs());
            let dot = u[0] * c + u[1] * s;
            let sg = if dot > 0.0 {
                1.0
            } else if dot < 0.0 {
                -1.0
            } else {
                0.0
            };
            [m, dot.abs() * m, sg * c * m, sg * s * m]
        };
        self.panels(breaks, |a, b, g| {
            let v = integrate(a, b, &mut f);
            out.seg_mass += g * v[0];
            out.transversal += g * v[1];
            out.delta_f[0] += g * v[2];
            out.delta_f[1] += g * v[3];
            if !sin_tau.is_empty() {
                let cos_mid = (0.5 * (a + b) - psi).cos().abs();
                for (k, st) in sin_tau.iter().enumerate() {
                    if cos_mid >= *st {
                        out.profile[k] += g * v[0];
                    }
                }
            }
        });
        Ok(out)
    }

    /// `ν(π B)` for an axis-aligned box.
    pub(crate) fn box_mass(&self, b: &BoxRegion) -> Result<f64> {
        let corners: Vec<[f64; 2]> = b.vertices().iter().map(xy).collect();
        let mut breaks = vec![0.0, FRAC_PI_2, PI];
        self.query_breaks(&corners, &mut breaks);
        let (lo, hi) = ([b.lo()[0], b.lo()[1]], [b.hi()[0], b.hi()[1]]);
        let (w0, w1) = (b.width(0), b.width(1));
        let mut f = |phi: f64| {
            let (s, c) = phi.sin_cos();
            let (x0, x1) = (lo[0] * c, hi[0] * c);
            let (y0, y1) = (lo[1] * s, hi[1] * s);
            let width = (w0 * c).abs() + (w1 * s).abs();
            [self.slab_mass(c, s, x0.min(x1) + y0.min(y1), x0.max(x1) + y0.max(y1), width)]
        };
        let mut total = 0.0;
        self.panels(breaks, |a, b, g| total += g * integrate(a, b, &mut f)[0]);
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_probabilities() {
        let t = |z, a, b, lo: f64, hi: f64| trapezoid_prob(z, a, b, lo, hi, hi - lo);
        assert!((t(0.0, 2.0, 1.0, 0.0, 3.0) - 1.0).abs() < 1e-15);
        assert!((t(0.0, 2.0, 1.0, 1.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((t(0.0, 2.0, 0.0, 0.5, 1.0) - 0.25).abs() < 1e-15);
        assert!((t(0.0, 2.0, 1.0, -5.0, 0.5) - 0.0625).abs() < 1e-15);
        assert!((t(0.0, 2.0, 1.0, 0.5, 2.5) - (1.0 - 2.0 * 0.0625)).abs() < 1e-15);
        assert_eq!(t(1.0, 0.0, 0.0, 1.0, 1.0), 1.0);
        assert_eq!(t(1.0, 0.0, 0.0, 1.5, 2.0), 0.0);
        // symmetric around the center
        let a = t(0.0, 3.0, 1.0, 0.0, 0.7);
        let b = t(0.0, 3.0, 1.0, 4.0 - 0.7, 4.0);
        assert!((a - b).abs() < 1e-15);
    }
}
