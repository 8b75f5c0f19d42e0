//! Seeded, stratified sampling of query configurations.
//!
//! Every purpose draws from its own ChaCha stream of the plan seed, so adding
//! cubes to a plan does not move its segments.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Cube, Point};
use crate::measure::direction::sample_sphere;

pub const STREAM_SEGMENTS: u64 = 1;
pub const STREAM_TRIPLES: u64 = 2;
pub const STREAM_CYCLES: u64 = 3;
pub const STREAM_CUBES: u64 = 4;
pub const STREAM_VALIDATION: u64 = 5;
pub const STREAM_DOUBLING: u64 = 6;
pub const STREAM_ORACLE: u64 = 7;

fn default_triples() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SamplingPlan {
    pub region: BoxRegion,
    pub pair_count: usize,
    #[serde(default = "default_triples")]
    pub triple_count: usize,
    pub cycle_count: usize,
    pub cube_count: usize,
    /// `(minLength, maxLength)` for segments, triples, cycles and cubes.
    pub scale_range: (f64, f64),
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(region: BoxRegion, seed: u64) -> Self {
        let w = region.min_width();
        Self {
            region,
            pair_count: 1000,
            triple_count: 500,
            cycle_count: 1000,
            cube_count: 200,
            scale_range: (w * 1e-3, w),
            seed,
        }
    }

    pub fn with_counts(mut self, pairs: usize, triples: usize, cycles: usize, cubes: usize) -> Self {
        self.pair_count = pairs;
        self.triple_count = triples;
        self.cycle_count = cycles;
        self.cube_count = cubes;
        self
    }

    pub fn with_scale_range(mut self, min: f64, max: f64) -> Self {
        self.scale_range = (min, max);
        self
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn check(&self) -> Result<()> {
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidPlan(format!("scale range ({lo}, {hi}) must satisfy 0 < min <= max")));
        }
        if self.region.intrinsic_dim() != self.region.dim() {
            return Err(Error::InvalidPlan("plan region must have positive width on every axis".into()));
        }
        if self.pair_count == 0 || self.cycle_count == 0 || self.cube_count == 0 {
            return Err(Error::InvalidPlan("counts must be positive".into()));
        }
        Ok(())
    }

    /// Random stream dedicated to one purpose.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Latin-hypercube points in the region.
    pub fn points(&self, stream: u64, count: usize) -> Vec<Point> {
        let mut rng = self.rng(stream);
        self.lhs(&mut rng, count)
    }

    fn lhs(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<Point> {
        let n = self.dim();
        let strata: Vec<Vec<f64>> = (0..n).map(|_| stratified(rng, count)).collect();
        (0..count)
            .map(|i| {
                let c: Vec<f64> = (0..n)
                    .map(|d| self.region.lo()[d] + strata[d][i] * self.region.width(d))
                    .collect();
                Point::new(c).expect("finite region")
            })
            .collect()
    }

    fn log_lengths(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
        let (lo, hi) = self.scale_range;
        stratified(rng, count)
            .into_iter()
            .map(|u| lo * (hi / lo).powf(u))
            .collect()
    }

    fn directions(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        if n == 2 {
            return stratified(rng, count)
                .into_iter()
                .map(|u| {
                    let a = 2.0 * PI * u;
                    vec![a.cos(), a.sin()]
                })
                .collect();
        }
        (0..count)
            .map(|_| {
                let mut v = vec![0.0; n];
                sample_sphere(rng, &mut v);
                v
            })
            .collect()
    }

    /// Largest `t >= 0` with `x + t u` in the region.
    fn reach(&self, x: &[f64], u: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for i in 0..x.len() {
            if u[i] > 0.0 {
                t = t.min((self.region.hi()[i] - x[i]) / u[i]);
            } else if u[i] < 0.0 {
                t = t.min((self.region.lo()[i] - x[i]) / u[i]);
            }
        }
        t.max(0.0)
    }

    fn endpoint(&self, x: &Point, u: &[f64], len: f64) -> Point {
        let neg: Vec<f64> = u.iter().map(|c| -c).collect();
        let (fwd, back) = (self.reach(x.coords(), u), self.reach(x.coords(), &neg));
        let (dir, l) = if fwd >= len {
            (u.to_vec(), len)
        } else if back >= len {
            (neg, len)
        } else if fwd >= back {
            (u.to_vec(), fwd)
        } else {
            (neg, back)
        };
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + l * d).collect();
        self.clamp(y)
    }

    fn clamp(&self, mut y: Vec<f64>) -> Point {
        for (i, c) in y.iter_mut().enumerate() {
            *c = c.clamp(self.region.lo()[i], self.region.hi()[i]);
        }
        Point::new(y).expect("finite region")
    }

    /// Segments stratified jointly over position, direction and log-length.
    pub fn segments(&self) -> Vec<(Point, Point)> {
        let mut rng = self.rng(STREAM_SEGMENTS);
        let count = self.pair_count;
        let xs = self.lhs(&mut rng, count);
        let dirs = self.directions(&mut rng, count);
        let lens = self.log_lengths(&mut rng, count);
        xs.into_iter()
            .zip(dirs)
            .zip(lens)
            .filter_map(|((x, u), l)| {
                let y = self.endpoint(&x, &u, l);
                (y != x).then_some((x, y))
            })
            .collect()
    }

    /// Triples `(x, a, b)` with `|x - a|` and `|x - b|` drawn independently
    /// log-uniform in the scale range.
    pub fn triples(&self) -> Vec<(Point, Point, Point)> {
        let mut rng = self.rng(STREAM_TRIPLES);
        let count = self.triple_count;
        let xs = self.lhs(&mut rng, count);
        let da = self.directions(&mut rng, count);
        let la = self.log_lengths(&mut rng, count);
        let db = self.directions(&mut rng, count);
        let mut lb = self.log_lengths(&mut rng, count);
        lb.shuffle(&mut rng);
        (0..count)
            .map(|i| {
                let a = self.endpoint(&xs[i], &da[i], la[i]);
                let b = self.endpoint(&xs[i], &db[i], lb[i]);
                (xs[i].clone(), a, b)
            })
            .collect()
    }

    /// Closed polygons with `2..=8` vertices scattered around a center at a
    /// log-uniform scale.
    pub fn cycles(&self) -> Vec<Vec<Point>> {
        let mut rng = self.rng(STREAM_CYCLES);
        let count = self.cycle_count;
        let centers = self.lhs(&mut rng, count);
        let scales = self.log_lengths(&mut rng, count);
        let n = self.dim();
        centers
            .into_iter()
            .zip(scales)
            .map(|(c, s)| {
                let m = rng.random_range(2..=8usize);
                (0..m)
                    .map(|_| {
                        let y: Vec<f64> = (0..n)
                            .map(|d| c[d] + s * (2.0 * rng.random::<f64>() - 1.0))
                            .collect();
                        self.clamp(y)
                    })
                    .collect()
            })
            .collect()
    }

    /// Axis-aligned cubes inside the region.
    pub fn cubes(&self) -> Vec<Cube> {
        let mut rng = self.rng(STREAM_CUBES);
        let count = self.cube_count;
        let edges = self.log_lengths(&mut rng, count);
        let n = self.dim();
        let cap = self.region.min_width();
        edges
            .into_iter()
            .map(|e| {
                let e = e.min(cap);
                let c: Vec<f64> = (0..n)
                    .map(|d| {
                        let lo = self.region.lo()[d] + 0.5 * e;
                        let hi = self.region.hi()[d] - 0.5 * e;
                        lo + rng.random::<f64>() * (hi - lo).max(0.0)
                    })
                    .collect();
                Cube::new(Point::new(c).expect("finite region"), e).expect("positive edge")
            })
            .collect()
    }

    /// Ball centers and radii for doubling checks.
    pub fn balls(&self, count: usize) -> Vec<(Point, f64)> {
        let mut rng = self.rng(STREAM_DOUBLING);
        let xs = self.lhs(&mut rng, count);
        let rs = self.log_lengths(&mut rng, count);
        xs.into_iter().zip(rs).collect()
    }
}

/// One uniform draw in each of `count` equal strata of `[0, 1)`, shuffled.
fn stratified(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..count)
        .map(|i| (i as f64 + rng.random::<f64>()) / count as f64)
        .collect();
    v.shuffle(rng);
    v
}
