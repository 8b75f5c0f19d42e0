//! Unbiased Monte Carlo oracle for the hyperplane integrals.
//!
//! The budget is cut into fixed-size chunks, chunk `k` draws from stream `k`
//! of the seed, and chunk statistics are merged in chunk order, so results do
//! not depend on how many threads run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, BoxRegion, Cube, Point};
use crate::measure::{BaseMeasure, HyperplaneKind, HyperplaneMeasure};

const CHUNK: u64 = 8192;

/// Integral requested from [`mc_estimate`].
#[derive(Debug, Clone)]
pub enum McQuery {
    SegMass { x: Point, y: Point },
    Transversal { x: Point, y: Point },
    /// `f_ν(x)` with basepoint `o`.
    Embed { o: Point, x: Point },
    CubeMass(Cube),
    BoxMass(BoxRegion),
    /// `[ν(π[x,y]), ∫ sin α dν, f(x) - f(y), ν{α >= τ_k}...]`.
    Pair { x: Point, y: Point, taus: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McEstimate {
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub samples: u64,
}

impl McEstimate {
    pub fn value(&self) -> f64 {
        self.values[0]
    }

    pub fn std_error(&self) -> f64 {
        self.std_errors[0]
    }
}

#[derive(Clone)]
struct Stats {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Stats {
    fn new(k: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; k],
            m2: vec![0.0; k],
        }
    }

    fn push(&mut self, y: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((v, mean), m2) in y.iter().zip(&mut self.mean).zip(&mut self.m2) {
            let d = v - *mean;
            *mean += d / n;
            *m2 += d * (v - *mean);
        }
    }

    fn merge(&mut self, o: &Stats) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o.clone();
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = o.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += o.m2[i] + d * d * na * nb / n;
        }
        self.n += o.n;
    }
}

enum Target {
    Segment {
        x: Vec<f64>,
        y: Vec<f64>,
        u: Vec<f64>,
        sin_tau: Vec<f64>,
    },
    Region(BoxRegion),
}

impl Target {
    fn width(&self, n: usize) -> usize {
        match self {
            Target::Segment { sin_tau, .. } => 2 + n + sin_tau.len(),
            Target::Region(_) => 1,
        }
    }

    fn interval(&self, v: &[f64]) -> (f64, f64) {
        match self {
            Target::Segment { x, y, .. } => {
                let px: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
                let py: f64 = y.iter().zip(v).map(|(a, b)| a * b).sum();
                (px.min(py), px.max(py))
            }
            Target::Region(b) => b.projection_interval(v),
        }
    }

    /// Adds the contribution of the hyperplane `{<z, v> = c}` with weight `w`.
    fn add(&self, v: &[f64], c: f64, w: f64, acc: &mut [f64]) {
        match self {
            Target::Segment { x, y, u, sin_tau } => {
                let gx: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - c;
                let gy: f64 = y.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - c;
                if gx * gy > 0.0 {
                    return;
                }
                let sin_alpha = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs().min(1.0);
                acc[0] += w;
                acc[1] += w * sin_alpha;
                // normal pointing out of the halfspace of y
                let sign = if gy < 0.0 {
                    1.0
                } else if gy > 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let n = v.len();
                for i in 0..n {
                    acc[2 + i] += w * sign * v[i];
                }
                for (k, st) in sin_tau.iter().enumerate() {
                    if sin_alpha >= *st {
                        acc[2 + n + k] += w;
                    }
                }
            }
            Target::Region(b) => {
                let (lo, hi) = b.projection_interval(v);
                if lo <= c && c <= hi {
                    acc[0] += w;
                }
            }
        }
    }
}

fn segment_target(x: &Point, y: &Point, taus: &[f64]) -> Result<Target> {
    check_dim(x.dim(), y.dim())?;
    let d = x.sub(y);
    let len = d.norm();
    let u = if len > 0.0 {
        (d / len).as_slice().to_vec()
    } else {
        vec![0.0; x.dim()]
    };
    Ok(Target::Segment {
        x: x.coords().to_vec(),
        y: y.coords().to_vec(),
        u,
        sin_tau: taus.iter().map(|t| t.sin()).collect(),
    })
}

/// Monte Carlo estimate of `query` with its standard error. Identical
/// `(nu, query, budget, seed)` give bit-identical results.
pub fn mc_estimate(nu: &HyperplaneMeasure, query: &McQuery, budget: u64, seed: u64) -> Result<McEstimate> {
    let n = nu.dim();
    let (target, select): (Target, Vec<usize>) = match query {
        McQuery::SegMass { x, y } => (segment_target(x, y, &[])?, vec![0]),
        McQuery::Transversal { x, y } => (segment_target(x, y, &[])?, vec![1]),
        McQuery::Embed { o, x } => (segment_target(x, o, &[])?, (2..2 + n).collect()),
        McQuery::Pair { x, y, taus } => {
            let t = segment_target(x, y, taus)?;
            let k = t.width(n);
            (t, (0..k).collect())
        }
        McQuery::CubeMass(q) => (Target::Region(q.as_box()), vec![0]),
        McQuery::BoxMass(b) => (Target::Region(b.clone()), vec![0]),
    };
    match &target {
        Target::Segment { x, y, .. } => {
            check_dim(n, x.len())?;
            let px = Point::from_slice(x)?;
            let py = Point::from_slice(y)?;
            nu.check_segment_clear(&px, &py)?;
        }
        Target::Region(b) => check_dim(n, b.dim())?,
    }
    if let HyperplaneKind::Sampler(s) = nu.kind() {
        let region = s.bounding_region().ok_or(Error::MissingBoundingRegion)?;
        let inside = match &target {
            Target::Segment { x, y, .. } => {
                region.contains(&Point::from_slice(x)?) && region.contains(&Point::from_slice(y)?)
            }
            Target::Region(b) => region.contains_box(b),
        };
        if !inside {
            return Err(Error::OutsideBoundingRegion);
        }
    }
    if budget == 0 || proposal_mass(nu) == 0.0 {
        return Err(Error::ZeroEffectiveSamples);
    }
    let width = target.width(n);
    let chunks = budget.div_ceil(CHUNK);
    let parts: Vec<Stats> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let count = CHUNK.min(budget - k * CHUNK);
            run_chunk(nu, &target, width, seed, k, count)
        })
        .collect();
    let mut total = Stats::new(width);
    for p in &parts {
        total.merge(p);
    }
    if total.n == 0 {
        return Err(Error::ZeroEffectiveSamples);
    }
    let nf = total.n as f64;
    let se = |i: usize| {
        if total.n > 1 {
            (total.m2[i] / (nf - 1.0) / nf).sqrt()
        } else {
            f64::INFINITY
        }
    };
    Ok(McEstimate {
        values: select.iter().map(|&i| total.mean[i]).collect(),
        std_errors: select.iter().map(|&i| se(i)).collect(),
        samples: total.n,
    })
}

fn proposal_mass(nu: &HyperplaneMeasure) -> f64 {
    match nu.kind() {
        HyperplaneKind::PositionDirection { mu, omega } => match mu {
            BaseMeasure::Spatial(m) => m.total_mass() * omega.total_mass(),
            BaseMeasure::Line(_) => omega.total_mass(),
        },
        HyperplaneKind::OffsetDirection { omega, .. } => omega.total_mass(),
        HyperplaneKind::Sampler(_) => 1.0,
    }
}

fn run_chunk(nu: &HyperplaneMeasure, target: &Target, width: usize, seed: u64, k: u64, count: u64) -> Stats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let n = nu.dim();
    let scale = nu.scale();
    let mut stats = Stats::new(width);
    let mut acc = vec![0.0; width];
    let mut v = vec![0.0; n];
    let mut a = vec![0.0; n];
    for _ in 0..count {
        acc.iter_mut().for_each(|c| *c = 0.0);
        match nu.kind() {
            HyperplaneKind::PositionDirection { mu, omega } => {
                let om = omega.total_mass();
                omega.sample(n, &mut rng, &mut v);
                match mu {
                    BaseMeasure::Spatial(m) => {
                        m.sample(&mut rng, &mut a);
                        let c: f64 = a.iter().zip(&v).map(|(p, q)| p * q).sum();
                        target.add(&v, c, m.total_mass() * om * scale, &mut acc);
                    }
                    BaseMeasure::Line(l) => {
                        let d: f64 = l.direction().iter().zip(&v).map(|(p, q)| p * q).sum();
                        let b: f64 = l.base().iter().zip(&v).map(|(p, q)| p * q).sum();
                        if d != 0.0 {
                            let (lo, hi) = target.interval(&v);
                            let (t1, t2) = ((lo - b) / d, (hi - b) / d);
                            let (t1, t2) = (t1.min(t2), t1.max(t2));
                            let t = t1 + rng.random::<f64>() * (t2 - t1);
                            let dens = l.measure().density_at(t);
                            if dens > 0.0 {
                                target.add(&v, b + t * d, om * scale * (t2 - t1) * dens, &mut acc);
                            }
                            for &(ta, w) in l.measure().atoms_in(t1, t2) {
                                target.add(&v, b + ta * d, om * scale * w, &mut acc);
                            }
                        }
                    }
                }
            }
            HyperplaneKind::OffsetDirection { omega, offsets, .. } => {
                let om = omega.total_mass();
                omega.sample(n, &mut rng, &mut v);
                let (lo, hi) = target.interval(&v);
                let p = lo + rng.random::<f64>() * (hi - lo);
                let dens = offsets.density_at(p);
                if dens > 0.0 {
                    target.add(&v, p, om * scale * (hi - lo) * dens, &mut acc);
                }
                for &(pa, w) in offsets.atoms_in(lo, hi) {
                    target.add(&v, pa, om * scale * w, &mut acc);
                }
            }
            HyperplaneKind::Sampler(s) => {
                let (h, w) = s.sample(&mut rng);
                if !w.is_finite() {
                    continue;
                }
                target.add(h.normal().as_slice(), h.offset(), w * scale, &mut acc);
            }
        }
        stats.push(&acc);
    }
    stats
}
