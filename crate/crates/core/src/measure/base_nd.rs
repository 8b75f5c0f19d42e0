use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::base1d::BaseMeasure1D;
use crate::error::{Error, Result};
use crate::geometry::{check_dim, BoxRegion, Point, Vector};

/// Axis-aligned box carrying a constant density with respect to the volume of
/// its nondegenerate axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub region: BoxRegion,
    pub density: f64,
}

impl Cell {
    pub fn mass(&self) -> f64 {
        if self.density == 0.0 {
            0.0
        } else {
            self.density * self.region.volume()
        }
    }

    fn active_axes(&self) -> Vec<usize> {
        (0..self.region.dim()).filter(|&i| self.region.width(i) > 0.0).collect()
    }
}

/// Measure on ℝⁿ made of atoms and constant-density boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasureND", into = "RawMeasureND")]
pub struct BaseMeasureND {
    dim: usize,
    atoms: Vec<(Point, f64)>,
    cells: Vec<Cell>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawMeasureND {
    dim: usize,
    #[serde(default)]
    atoms: Vec<(Point, f64)>,
    #[serde(default)]
    cells: Vec<Cell>,
}

impl TryFrom<RawMeasureND> for BaseMeasureND {
    type Error = Error;
    fn try_from(r: RawMeasureND) -> Result<Self> {
        BaseMeasureND::new(r.dim, r.atoms, r.cells)
    }
}

impl From<BaseMeasureND> for RawMeasureND {
    fn from(m: BaseMeasureND) -> Self {
        RawMeasureND {
            dim: m.dim,
            atoms: m.atoms,
            cells: m.cells,
        }
    }
}

fn cells_overlap(a: &Cell, b: &Cell) -> bool {
    let (ra, rb) = (&a.region, &b.region);
    (0..ra.dim()).all(|i| {
        let (wa, wb) = (ra.width(i), rb.width(i));
        if (wa > 0.0) != (wb > 0.0) {
            return false;
        }
        let lo = ra.lo()[i].max(rb.lo()[i]);
        let hi = ra.hi()[i].min(rb.hi()[i]);
        if wa > 0.0 {
            hi > lo
        } else {
            hi >= lo
        }
    })
}

impl BaseMeasureND {
    pub fn new(dim: usize, atoms: Vec<(Point, f64)>, cells: Vec<Cell>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        for (a, w) in &atoms {
            check_dim(dim, a.dim())?;
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidMeasure(format!("atom weight must be positive, got {w}")));
            }
        }
        for c in &cells {
            check_dim(dim, c.region.dim())?;
            if !c.density.is_finite() || c.density < 0.0 {
                return Err(Error::InvalidMeasure(format!("bad cell density {}", c.density)));
            }
        }
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                if cells_overlap(a, b) {
                    return Err(Error::InvalidMeasure(format!(
                        "cells {:?} and {:?} overlap",
                        a.region, b.region
                    )));
                }
            }
        }
        let mut cumulative = Vec::with_capacity(atoms.len() + cells.len());
        let mut acc = 0.0;
        for (_, w) in &atoms {
            acc += w;
            cumulative.push(acc);
        }
        for c in &cells {
            acc += c.mass();
            cumulative.push(acc);
        }
        Ok(Self {
            dim,
            atoms,
            cells,
            cumulative,
        })
    }

    /// Constant density on a single box.
    pub fn lebesgue_box(region: BoxRegion, density: f64) -> Result<Self> {
        Self::new(region.dim(), vec![], vec![Cell { region, density }])
    }

    pub fn atomic(atoms: Vec<(Point, f64)>) -> Result<Self> {
        let dim = atoms.first().map(|a| a.0.dim()).ok_or_else(|| {
            Error::InvalidMeasure("atomic measure needs at least one atom".into())
        })?;
        Self::new(dim, atoms, vec![])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[(Point, f64)] {
        &self.atoms
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Atoms and cell corners.
    pub fn support_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self.atoms.iter().map(|a| a.0.clone()).collect();
        for c in &self.cells {
            if c.density > 0.0 {
                pts.extend(c.region.vertices());
            }
        }
        pts
    }

    /// Affine rank of the atoms and cell corners.
    pub fn affine_rank(&self) -> usize {
        affine_rank(&self.support_points())
    }

    /// Draws a point from the normalized measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let total = self.total_mass();
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|c| *c <= u).min(self.cumulative.len() - 1);
        if k < self.atoms.len() {
            out.copy_from_slice(self.atoms[k].0.coords());
            return;
        }
        let r = &self.cells[k - self.atoms.len()].region;
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = if r.width(i) > 0.0 {
                r.lo()[i] + rng.random::<f64>() * r.width(i)
            } else {
                r.lo()[i]
            };
        }
    }

    /// `μ(B(x, r))` for the closed ball; cells are resolved by adaptive
    /// subdivision.
    pub fn ball_mass(&self, x: &Point, r: f64) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        let r2 = r * r;
        let mut m: f64 = self
            .atoms
            .iter()
            .filter(|(a, _)| a.sub(x).norm_squared() <= r2)
            .map(|(_, w)| w)
            .sum();
        for c in &self.cells {
            if c.density == 0.0 {
                continue;
            }
            let axes = c.active_axes();
            let depth = match axes.len() {
                0 | 1 => 26,
                2 => 13,
                3 => 8,
                _ => 5,
            };
            let r = r2.sqrt();
            let lo: Vec<f64> = c.region.lo().iter().zip(x.coords()).map(|(l, xi)| l.max(xi - r)).collect();
            let hi: Vec<f64> = c.region.hi().iter().zip(x.coords()).map(|(h, xi)| h.min(xi + r)).collect();
            if lo.iter().zip(&hi).any(|(l, h)| l > h) {
                continue;
            }
            m += c.density * box_ball_volume(&lo, &hi, &axes, x.coords(), r2, depth);
        }
        Ok(m)
    }

    /// `∫ |x|⁻¹ dμ(x)`.
    pub fn tail1(&self) -> Result<f64> {
        let mut total = 0.0;
        for (a, w) in &self.atoms {
            let n = a.norm();
            if n == 0.0 {
                return Err(Error::InvalidMeasure("atom at the origin in tail integral".into()));
            }
            total += w / n;
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(6).unwrap());
        for c in &self.cells {
            if c.density == 0.0 {
                continue;
            }
            let axes = c.active_axes();
            for (lo, hi) in split_at_origin(&c.region, &axes) {
                total += c.density * inverse_norm_integral(&rule, &lo, &hi, &axes, 0);
            }
        }
        Ok(total)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.atoms.iter().map(|(a, w)| (a.clone(), w * s)).collect(),
            self.cells
                .iter()
                .map(|c| Cell {
                    region: c.region.clone(),
                    density: c.density * s,
                })
                .collect(),
        )
    }

    pub fn translated(&self, by: &Vector) -> Result<Self> {
        check_dim(self.dim, by.len())?;
        Self::new(
            self.dim,
            self.atoms.iter().map(|(a, w)| (a.translated(by), *w)).collect(),
            self.cells
                .iter()
                .map(|c| Cell {
                    region: c.region.translated(by),
                    density: c.density,
                })
                .collect(),
        )
    }
}

pub(crate) fn affine_rank(points: &[Point]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let n = first.dim();
    let rows = points.len() - 1;
    if rows == 0 {
        return 0;
    }
    let mut m = DMatrix::zeros(rows, n);
    let mut scale: f64 = 0.0;
    for (i, p) in points[1..].iter().enumerate() {
        let d = p.sub(first);
        scale = scale.max(d.amax());
        m.row_mut(i).copy_from(&d.transpose());
    }
    if scale == 0.0 {
        return 0;
    }
    m.rank(1e-10 * scale)
}

fn box_ball_volume(lo: &[f64], hi: &[f64], axes: &[usize], x: &[f64], r2: f64, depth: u32) -> f64 {
    let mut dmin = 0.0;
    let mut dmax = 0.0;
    for i in 0..lo.len() {
        let (a, b) = (lo[i] - x[i], hi[i] - x[i]);
        let near = if a > 0.0 {
            a
        } else if b < 0.0 {
            b
        } else {
            0.0
        };
        dmin += near * near;
        dmax += (a * a).max(b * b);
    }
    let vol: f64 = axes.iter().map(|&i| hi[i] - lo[i]).product();
    if dmax <= r2 {
        return vol;
    }
    if dmin > r2 {
        return 0.0;
    }
    if depth == 0 || axes.is_empty() {
        let c2: f64 = (0..lo.len())
            .map(|i| {
                let d = 0.5 * (lo[i] + hi[i]) - x[i];
                d * d
            })
            .sum();
        return if c2 <= r2 { vol } else { 0.0 };
    }
    let mut total = 0.0;
    for mask in 0..1usize << axes.len() {
        let mut l = lo.to_vec();
        let mut h = hi.to_vec();
        for (k, &i) in axes.iter().enumerate() {
            let mid = 0.5 * (lo[i] + hi[i]);
            if mask >> k & 1 == 1 {
                l[i] = mid;
            } else {
                h[i] = mid;
            }
        }
        total += box_ball_volume(&l, &h, axes, x, r2, depth - 1);
    }
    total
}

fn split_at_origin(r: &BoxRegion, axes: &[usize]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut parts = vec![(r.lo().to_vec(), r.hi().to_vec())];
    for &i in axes {
        let mut next = Vec::with_capacity(parts.len() * 2);
        for (lo, hi) in parts {
            if lo[i] < 0.0 && hi[i] > 0.0 {
                let mut h1 = hi.clone();
                h1[i] = 0.0;
                let mut l2 = lo.clone();
                l2[i] = 0.0;
                next.push((lo, h1));
                next.push((l2, hi));
            } else {
                next.push((lo, hi));
            }
        }
        parts = next;
    }
    parts
}

fn tensor_inverse_norm(rule: &GaussLegendre, lo: &[f64], hi: &[f64], axes: &[usize]) -> f64 {
    let nodes = rule.as_node_weight_pairs();
    let k = axes.len();
    let mut idx = vec![0usize; k];
    let mut x = lo.to_vec();
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (d, &i) in axes.iter().enumerate() {
            let (t, wt) = nodes[idx[d]];
            let half = 0.5 * (hi[i] - lo[i]);
            x[i] = lo[i] + half * (t + 1.0);
            w *= wt * half;
        }
        let n = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        total += w / n;
        let mut d = 0;
        loop {
            if d == k {
                return total;
            }
            idx[d] += 1;
            if idx[d] < nodes.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn inverse_norm_integral(
    rule: &GaussLegendre,
    lo: &[f64],
    hi: &[f64],
    axes: &[usize],
    depth: u32,
) -> f64 {
    let coarse = tensor_inverse_norm(rule, lo, hi, axes);
    let mut fine = 0.0;
    let mut children = Vec::new();
    for mask in 0..1usize << axes.len() {
        let mut l = lo.to_vec();
        let mut h = hi.to_vec();
        for (k, &i) in axes.iter().enumerate() {
            let mid = 0.5 * (lo[i] + hi[i]);
            if mask >> k & 1 == 1 {
                l[i] = mid;
            } else {
                h[i] = mid;
            }
        }
        fine += tensor_inverse_norm(rule, &l, &h, axes);
        children.push((l, h));
    }
    if (fine - coarse).abs() <= 1e-11 * fine.abs() || depth >= 48 {
        return fine;
    }
    children
        .iter()
        .map(|(l, h)| inverse_norm_integral(rule, l, h, axes, depth + 1))
        .sum()
}

/// Measure supported on the line `base + t·direction`, with `t` distributed by
/// a measure on ℝ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineMeasure {
    base: Point,
    direction: Vector,
    measure: BaseMeasure1D,
}

impl LineMeasure {
    pub fn new(base: Point, direction: Vector, measure: BaseMeasure1D) -> Result<Self> {
        check_dim(base.dim(), direction.len())?;
        let n = direction.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            base,
            direction: direction / n,
            measure,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    pub fn measure(&self) -> &BaseMeasure1D {
        &self.measure
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.base.translated(&(&self.direction * t))
    }

    /// Parameter of the orthogonal projection of `x` on the line.
    pub fn parameter_of(&self, x: &Point) -> f64 {
        x.sub(&self.base).dot(&self.direction)
    }

    /// Points of the line at atoms and finite piece edges.
    pub fn feature_points(&self) -> Vec<Point> {
        self.measure.features().into_iter().map(|t| self.point_at(t)).collect()
    }

    pub fn atom_points(&self) -> Vec<(Point, f64)> {
        self.measure.atoms().iter().map(|&(t, w)| (self.point_at(t), w)).collect()
    }
}

/// Base measure μ of a position-direction pushforward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BaseMeasure {
    Spatial(BaseMeasureND),
    Line(LineMeasure),
}

impl BaseMeasure {
    pub fn dim(&self) -> usize {
        match self {
            BaseMeasure::Spatial(m) => m.dim(),
            BaseMeasure::Line(l) => l.dim(),
        }
    }

    /// Atoms as points of ℝⁿ.
    pub fn atom_points(&self) -> Vec<(Point, f64)> {
        match self {
            BaseMeasure::Spatial(m) => m.atoms().to_vec(),
            BaseMeasure::Line(l) => l.atom_points(),
        }
    }

    /// Points where the slab mass can change smoothness: atoms, cell corners,
    /// and line-measure edges.
    pub fn feature_points(&self) -> Vec<Point> {
        match self {
            BaseMeasure::Spatial(m) => m.support_points(),
            BaseMeasure::Line(l) => l.feature_points(),
        }
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Ok(match self {
            BaseMeasure::Spatial(m) => BaseMeasure::Spatial(m.scaled(s)?),
            BaseMeasure::Line(l) => BaseMeasure::Line(LineMeasure {
                measure: l.measure.scaled(s)?,
                ..l.clone()
            }),
        })
    }

    pub fn translated(&self, by: &Vector) -> Result<Self> {
        Ok(match self {
            BaseMeasure::Spatial(m) => BaseMeasure::Spatial(m.translated(by)?),
            BaseMeasure::Line(l) => BaseMeasure::Line(LineMeasure {
                base: l.base.translated(by),
                ..l.clone()
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> Point {
        Point::from_slice(c).unwrap()
    }

    #[test]
    fn tail1_atoms() {
        let m = BaseMeasureND::atomic(vec![(p(&[1.0, 0.0]), 1.0)]).unwrap();
        assert_eq!(m.tail1().unwrap(), 1.0);
        let m = BaseMeasureND::atomic(vec![(p(&[2.0, 0.0]), 2.0), (p(&[0.0, -4.0]), 4.0)]).unwrap();
        assert_eq!(m.tail1().unwrap(), 2.0);
        let m = BaseMeasureND::atomic(vec![(p(&[0.0, 0.0]), 1.0)]).unwrap();
        assert!(m.tail1().is_err());
    }

    #[test]
    fn tail1_box_is_stable() {
        for n in [2usize, 3] {
            let b = BoxRegion::new(vec![1.0; n], vec![2.0; n]).unwrap();
            let m = BaseMeasureND::lebesgue_box(b, 1.0).unwrap();
            let v = m.tail1().unwrap();
            // same box cut into 2ⁿ cells
            let mut cells = Vec::new();
            for mask in 0..1usize << n {
                let lo: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.5 } else { 1.0 }).collect();
                let hi: Vec<f64> = lo.iter().map(|l| l + 0.5).collect();
                cells.push(Cell { region: BoxRegion::new(lo, hi).unwrap(), density: 1.0 });
            }
            let refined = BaseMeasureND::new(n, vec![], cells).unwrap().tail1().unwrap();
            assert!(v > 0.0 && v.is_finite());
            assert!((v - refined).abs() < 1e-6, "{v} vs {refined}");
        }
    }

    #[test]
    fn tail1_with_origin_inside_cell() {
        // ∫ over the disc-free square [-1,1]² of 1/|x| = 8 asinh(1)
        let m = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 1.0).unwrap(), 1.0).unwrap();
        let expected = 8.0 * 1f64.asinh();
        assert!((m.tail1().unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn ball_mass_lebesgue() {
        let m = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 100.0).unwrap(), 1.0).unwrap();
        let x = p(&[0.3, -0.2]);
        let small = m.ball_mass(&x, 1.0).unwrap();
        assert!((small - std::f64::consts::PI).abs() < 1e-2);
        let big = m.ball_mass(&x, 2.0).unwrap();
        assert!((big / small - 4.0).abs() < 1e-2);
    }

    #[test]
    fn rank_and_overlap() {
        let line = BaseMeasureND::atomic(vec![
            (p(&[0.0, 0.0]), 1.0),
            (p(&[1.0, 1.0]), 1.0),
            (p(&[2.0, 2.0]), 1.0),
        ])
        .unwrap();
        assert_eq!(line.affine_rank(), 1);
        let b = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!(b.affine_rank(), 2);
        let c = |lo: [f64; 2], hi: [f64; 2]| Cell {
            region: BoxRegion::new(lo.to_vec(), hi.to_vec()).unwrap(),
            density: 1.0,
        };
        assert!(BaseMeasureND::new(2, vec![], vec![c([0.0, 0.0], [1.0, 1.0]), c([0.5, 0.5], [2.0, 2.0])])
            .is_err());
        assert!(BaseMeasureND::new(2, vec![], vec![c([0.0, 0.0], [1.0, 1.0]), c([1.0, 0.0], [2.0, 1.0])])
            .is_ok());
    }

    #[test]
    fn sampling_stays_in_support() {
        let m = BaseMeasureND::new(
            2,
            vec![(p(&[5.0, 5.0]), 1.0)],
            vec![Cell { region: BoxRegion::centered_cube(2, 1.0).unwrap(), density: 0.25 }],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut out = [0.0; 2];
        let mut atoms = 0;
        for _ in 0..4000 {
            m.sample(&mut rng, &mut out);
            if out == [5.0, 5.0] {
                atoms += 1;
            } else {
                assert!(out.iter().all(|c| c.abs() <= 1.0));
            }
        }
        assert!((atoms as f64 / 4000.0 - 0.5).abs() < 0.05);
    }
}
