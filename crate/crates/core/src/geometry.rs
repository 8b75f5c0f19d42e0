//! Dimension-generic primitives: points, segments, hyperplanes, angles and
//! axis-aligned cubes and boxes.
//!
//! A hyperplane `{z : <z, normal> = offset}` is the same set as
//! `{z : <z, -normal> = -offset}`. Everything here except [`Hyperplane::signed_gap`]
//! is invariant under that flip; the gap changes sign, so callers only ever use
//! products or absolute values of gaps.

use std::f64::consts::FRAC_PI_2;
use std::hash::{Hash, Hasher};
use std::ops::Deref;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column vector in ℝⁿ.
pub type Vector = DVector<f64>;

/// Tolerance on the norm of a hyperplane normal.
pub const UNIT_TOLERANCE: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A point of ℝⁿ, `n >= 2`, with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vector);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(Self(Vector::from_vec(coords)))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn from_vector(v: Vector) -> Result<Self> {
        Self::new(v.as_slice().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    /// `self - other` as a vector.
    pub fn sub(&self, other: &Point) -> Vector {
        &self.0 - &other.0
    }

    pub fn translated(&self, by: &Vector) -> Point {
        Point(&self.0 + by)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point(&self.0 + (&other.0 - &self.0) * t)
    }
}

impl Deref for Point {
    type Target = Vector;
    fn deref(&self) -> &Vector {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0.as_slice().to_vec()
    }
}

/// Closed segment `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `b - a`.
    pub fn direction(&self) -> Vector {
        self.b.sub(&self.a)
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }
}

/// The hyperplane `{z : <z, normal> = offset}` with a unit normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
}

impl Hyperplane {
    /// Builds `{z : <z, normal> = offset}`; a non-unit normal is rescaled
    /// together with the offset, so the set is unchanged.
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        if normal.len() < 2 {
            return Err(Error::InvalidDimension(normal.len()));
        }
        if normal.iter().any(|c| !c.is_finite()) || !offset.is_finite() {
            return Err(Error::NonFinite("hyperplane"));
        }
        let norm = normal.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() <= UNIT_TOLERANCE {
            return Ok(Self { normal, offset });
        }
        Ok(Self {
            normal: normal / norm,
            offset: offset / norm,
        })
    }

    /// The hyperplane through `a` with normal direction `v`, i.e. Φ(a, v).
    pub fn through(a: &Point, v: &Vector) -> Result<Self> {
        check_dim(a.dim(), v.len())?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let unit = v / norm;
        let offset = unit.dot(a.as_vector());
        Self::new(unit, offset)
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// The same set with `(normal, offset)` replaced by `(-normal, -offset)`.
    pub fn flipped(&self) -> Self {
        Self {
            normal: -&self.normal,
            offset: -self.offset,
        }
    }

    /// Representative whose first nonzero normal coordinate is positive.
    pub fn canonical(&self) -> Self {
        let first = self.normal.iter().find(|c| **c != 0.0).copied().unwrap_or(1.0);
        if first < 0.0 {
            self.flipped()
        } else {
            self.clone()
        }
    }

    /// `<x, normal> - offset`. Changes sign under [`Hyperplane::flipped`].
    pub fn signed_gap(&self, x: &Point) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.gap_unchecked(x.coords()))
    }

    pub(crate) fn gap_unchecked(&self, x: &[f64]) -> f64 {
        dot(self.normal.as_slice(), x) - self.offset
    }

    /// Closed-segment hit test: the gaps of the endpoints have product `<= 0`.
    pub fn hits_segment(&self, s: &Segment) -> bool {
        if s.dim() != self.dim() {
            return false;
        }
        let ga = self.gap_unchecked(s.a.coords());
        let gb = self.gap_unchecked(s.b.coords());
        ga * gb <= 0.0
    }

    /// Closed hit test against an axis-aligned box.
    pub fn hits_box(&self, region: &BoxRegion) -> bool {
        if region.dim() != self.dim() {
            return false;
        }
        let (lo, hi) = region.projection_interval(self.normal.as_slice());
        lo <= self.offset && self.offset <= hi
    }

    /// Unit normal pointing out of the halfspace that contains `o`.
    pub fn oriented_normal(&self, o: &Point) -> Result<Vector> {
        let gap = self.signed_gap(o)?;
        if gap == 0.0 {
            return Err(Error::PointOnHyperplane);
        }
        Ok(if gap < 0.0 {
            self.normal.clone()
        } else {
            -&self.normal
        })
    }
}

impl PartialEq for Hyperplane {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.normal == b.normal && a.offset == b.offset
    }
}

impl Hash for Hyperplane {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let c = self.canonical();
        for x in c.normal.iter() {
            x.to_bits().hash(state);
        }
        c.offset.to_bits().hash(state);
    }
}

/// Smaller angle between the line spanned by `u` and the hyperplane `h`,
/// in `[0, π/2]`.
pub fn alpha(u: &Vector, h: &Hyperplane) -> Result<f64> {
    check_dim(h.dim(), u.len())?;
    let norm = u.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(sin_alpha_unchecked(u.as_slice(), norm, h).asin())
}

/// `|<u/|u|, normal>|` clamped to `[0, 1]`, i.e. `sin alpha(u, h)`.
pub(crate) fn sin_alpha_unchecked(u: &[f64], u_norm: f64, h: &Hyperplane) -> f64 {
    (dot(u, h.normal.as_slice()).abs() / u_norm).clamp(0.0, 1.0)
}

/// Upper end of the `alpha` range.
pub const MAX_ALPHA: f64 = FRAC_PI_2;

/// Axis-aligned box `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`. Some axes may be
/// degenerate (`lo == hi`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TryFrom<RawBox> for BoxRegion {
    type Error = Error;
    fn try_from(r: RawBox) -> Result<Self> {
        BoxRegion::new(r.lo, r.hi)
    }
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.len() < 2 {
            return Err(Error::InvalidDimension(lo.len()));
        }
        if lo.iter().chain(&hi).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("box"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidMeasure(format!(
                "box lower corner {lo:?} exceeds upper corner {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-half, half]^n`.
    pub fn centered_cube(dim: usize, half: f64) -> Result<Self> {
        Self::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn min_width(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn center(&self) -> Point {
        Point(Vector::from_iterator(
            self.dim(),
            self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)),
        ))
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(c, (l, h))| *l <= *c && *c <= *h)
    }

    /// True when `other` lies inside `self`.
    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// True when `other` lies in the interior of `self`.
    pub fn strictly_contains_box(&self, other: &BoxRegion) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lo[i] < other.lo[i] && other.hi[i] < self.hi[i])
    }

    /// Number of axes with positive width.
    pub fn intrinsic_dim(&self) -> usize {
        (0..self.dim()).filter(|i| self.width(*i) > 0.0).count()
    }

    /// Product of the positive widths (the intrinsic volume).
    pub fn volume(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.width(i))
            .filter(|w| *w > 0.0)
            .product()
    }

    /// All `2^n` corners, in binary order of the axes (bit `i` set means `hi`).
    pub fn vertices(&self) -> Vec<Point> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                Point(Vector::from_iterator(
                    n,
                    (0..n).map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] }),
                ))
            })
            .collect()
    }

    /// `[min, max]` of `<z, v>` over the box.
    pub fn projection_interval(&self, v: &[f64]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (i, vi) in v.iter().enumerate() {
            let a = self.lo[i] * vi;
            let b = self.hi[i] * vi;
            lo += a.min(b);
            hi += a.max(b);
        }
        (lo, hi)
    }

    pub fn translated(&self, by: &Vector) -> BoxRegion {
        BoxRegion {
            lo: self.lo.iter().zip(by.iter()).map(|(l, t)| l + t).collect(),
            hi: self.hi.iter().zip(by.iter()).map(|(h, t)| h + t).collect(),
        }
    }
}

/// Axis-aligned cube given by its center and edge length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    center: Point,
    edge: f64,
}

impl Cube {
    pub fn new(center: Point, edge: f64) -> Result<Self> {
        if !(edge > 0.0 && edge.is_finite()) {
            return Err(Error::InvalidMeasure(format!("cube edge must be positive, got {edge}")));
        }
        Ok(Self { center, edge })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn as_box(&self) -> BoxRegion {
        let h = 0.5 * self.edge;
        BoxRegion {
            lo: self.center.iter().map(|c| c - h).collect(),
            hi: self.center.iter().map(|c| c + h).collect(),
        }
    }

    /// The `2^n` vertices `center ± edge/2` per axis.
    pub fn vertices(&self) -> Vec<Point> {
        self.as_box().vertices()
    }
}

/// Alias for [`Cube::vertices`].
pub fn cube_vertices(q: &Cube) -> Vec<Point> {
    q.vertices()
}
