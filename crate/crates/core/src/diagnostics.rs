//! Estimators and audits: transversality (κ, τ), δ-monotonicity,
//! quasisymmetry envelopes, cyclic monotonicity, the cube lemma and
//! bi-Lipschitz bounds.
//!
//! Everything is an empirical extremum over a seeded [`SamplingPlan`] and
//! carries the configuration that achieved it.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluators::{mc_estimate, Backend, EmbeddingMap, Evaluator, McQuery, PairQuantities, DEFAULT_MC_BUDGET};
use crate::geometry::{dot, Cube, Point};
use crate::measure::HyperplaneMeasure;
use crate::plan::SamplingPlan;

/// Step of the τ grid.
pub const TAU_STEP: f64 = 0.01;
/// Grid points `0.01 k` for `k = 1..=157` stay below `π/2`.
pub const TAU_GRID_LEN: usize = 157;
pub const ETA_BUCKETS: usize = 32;
pub const ETA_RANGE: (f64, f64) = (1e-2, 1e2);

pub const LIPSCHITZ_TOL: f64 = 1e-12;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const CHAIN_TOL: f64 = 1e-10;
pub const CYCLIC_TOL: f64 = 1e-10;
pub const CUBE_TOL: f64 = 1e-10;

pub fn tau_grid() -> Vec<f64> {
    (1..=TAU_GRID_LEN).map(|k| k as f64 * TAU_STEP).collect()
}

/// `4⁻ⁿ n^{-1/2}`.
pub fn cube_constant(n: usize) -> f64 {
    4f64.powi(-(n as i32)) / (n as f64).sqrt()
}

/// The configuration achieving a reported extremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Witness {
    Segment { x: Point, y: Point },
    Triple { x: Point, a: Point, b: Point },
    Cycle { points: Vec<Point> },
    Cube { center: Point, edge: f64 },
}

impl Witness {
    fn segment(x: &Point, y: &Point) -> Self {
        Witness::Segment { x: x.clone(), y: y.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Estimate {
    pub value: f64,
    pub witness: Option<Witness>,
}

/// Joint evaluation of one sampled segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub x: Point,
    pub y: Point,
    pub q: PairQuantities,
}

impl PairRecord {
    pub fn length(&self) -> f64 {
        self.x.distance(&self.y)
    }

    /// `⟨f(x) - f(y), x - y⟩`.
    pub fn inner(&self) -> f64 {
        dot(&self.q.delta_f, self.x.sub(&self.y).as_slice())
    }

    /// Ratio `∫ sin α dν / ν(π[x,y])`.
    pub fn kappa(&self) -> f64 {
        self.q.transversal / self.q.seg_mass
    }

    /// Ratio `⟨Δf, x - y⟩ / (|Δf| |x - y|)`.
    pub fn delta(&self) -> f64 {
        self.inner() / (self.q.delta_f_norm() * self.length())
    }

    /// `|Δf| / d_ν(x, y)`.
    pub fn bilip_ratio(&self) -> f64 {
        self.q.delta_f_norm() / self.q.seg_mass
    }

    fn witness(&self) -> Witness {
        Witness::segment(&self.x, &self.y)
    }
}

/// Evaluates every segment of the plan, with the angle profile at `taus`.
pub fn pair_sweep(eval: &Evaluator, segments: &[(Point, Point)], taus: &[f64]) -> Result<Vec<PairRecord>> {
    segments
        .par_iter()
        .map(|(x, y)| {
            let q = eval.pair(x, y, taus)?;
            if !(q.seg_mass > 0.0) {
                return Err(Error::AdmissibilityViolation(format!(
                    "segment [{:?}, {:?}] has zero mass",
                    x.coords(),
                    y.coords()
                )));
            }
            Ok(PairRecord { x: x.clone(), y: y.clone(), q })
        })
        .collect()
}

/// Pairs swept with the full τ grid when the backend can produce angle
/// profiles, else without it.
fn sweep_with_profile(eval: &Evaluator, plan: &SamplingPlan) -> Result<(Vec<PairRecord>, bool)> {
    let segments = plan.segments();
    let taus = tau_grid();
    match pair_sweep(eval, &segments, &taus) {
        Ok(r) => Ok((r, true)),
        Err(Error::UnsupportedBackend { .. }) => Ok((pair_sweep(eval, &segments, &[])?, false)),
        Err(e) => Err(e),
    }
}

fn min_by<T>(items: &[T], f: impl Fn(&T) -> f64) -> Option<(f64, &T)> {
    let mut best: Option<(f64, &T)> = None;
    for it in items {
        let v = f(it);
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, it));
        }
    }
    best
}

fn max_by<T>(items: &[T], f: impl Fn(&T) -> f64) -> Option<(f64, &T)> {
    min_by(items, |t| -f(t)).map(|(v, t)| (-v, t))
}

fn extremum(best: Option<(f64, &PairRecord)>) -> Result<Estimate> {
    let (value, r) = best.ok_or(Error::AllSamplesDegenerate)?;
    Ok(Estimate {
        value,
        witness: Some(r.witness()),
    })
}

pub fn kappa_from(records: &[PairRecord]) -> Result<Estimate> {
    extremum(min_by(records, |r| r.kappa()))
}

pub fn delta_from(records: &[PairRecord]) -> Result<Estimate> {
    if let Some(r) = records.iter().find(|r| !(r.q.delta_f_norm() > 0.0)) {
        return Err(Error::AdmissibilityViolation(format!(
            "f(x) = f(y) for x = {:?}, y = {:?}",
            r.x.coords(),
            r.y.coords()
        )));
    }
    extremum(min_by(records, |r| r.delta()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TauEstimate {
    pub tau_hat: f64,
    /// First segment violating the inequality at the next grid point.
    pub witness: Option<Witness>,
}

/// Largest grid `τ` with `ν{α >= τ} >= τ ν(π[x,y])` on every record; the
/// records must carry the profile on [`tau_grid`].
pub fn tau_from(records: &[PairRecord]) -> TauEstimate {
    let taus = tau_grid();
    let mut witness = None;
    let mut k_best = taus.len();
    for r in records {
        if let Some(k) = (0..k_best).find(|&k| r.q.profile[k] < taus[k] * r.q.seg_mass) {
            k_best = k;
            witness = Some(r.witness());
        }
    }
    TauEstimate {
        tau_hat: if k_best == 0 { 0.0 } else { taus[k_best - 1] },
        witness,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConverseCheck {
    pub tau: f64,
    /// Smallest `ν{α >= τ} / ν(π[x,y]) - τ`.
    pub margin: f64,
    pub holds: bool,
    pub witness: Option<Witness>,
}

fn converse_check(eval: &Evaluator, records: &[PairRecord], kappa: f64) -> Result<Option<ConverseCheck>> {
    let tau = 0.5 * kappa;
    let segments: Vec<(Point, Point)> = records.iter().map(|r| (r.x.clone(), r.y.clone())).collect();
    let rs = match pair_sweep(eval, &segments, &[tau]) {
        Ok(rs) => rs,
        Err(Error::UnsupportedBackend { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let best = min_by(&rs, |r| r.q.profile[0] / r.q.seg_mass - tau);
    Ok(best.map(|(margin, r)| ConverseCheck {
        tau,
        margin,
        holds: margin >= -CHAIN_TOL,
        witness: Some(r.witness()),
    }))
}

/// `min ∫ sin α dν / ν(π[x,y])` over the plan's segments.
pub fn kappa_hat(nu: &Arc<HyperplaneMeasure>, plan: &SamplingPlan) -> Result<Estimate> {
    plan.check()?;
    let eval = Evaluator::best(nu.clone())?;
    kappa_from(&pair_sweep(&eval, &plan.segments(), &[])?)
}

pub fn tau_hat(nu: &Arc<HyperplaneMeasure>, plan: &SamplingPlan) -> Result<TauEstimate> {
    plan.check()?;
    let eval = Evaluator::best(nu.clone())?;
    Ok(tau_from(&pair_sweep(&eval, &plan.segments(), &tau_grid())?))
}

pub fn delta_hat(f: &EmbeddingMap, plan: &SamplingPlan) -> Result<Estimate> {
    plan.check()?;
    delta_from(&pair_sweep(f.evaluator(), &plan.segments(), &[])?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Bilip {
    pub c_low: Estimate,
    pub c_high: Estimate,
}

pub fn bilip_from(records: &[PairRecord]) -> Result<Bilip> {
    Ok(Bilip {
        c_low: extremum(min_by(records, |r| r.bilip_ratio()))?,
        c_high: extremum(max_by(records, |r| r.bilip_ratio()))?,
    })
}

/// `cLow = min |Δf| / d_ν` and `cHigh = max |Δf| / d_ν` over the plan.
pub fn bilip_bounds(f: &EmbeddingMap, plan: &SamplingPlan) -> Result<Bilip> {
    plan.check()?;
    bilip_from(&pair_sweep(f.evaluator(), &plan.segments(), &[])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Metric {
    Euclidean,
    Nu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EtaBucket {
    pub t_lo: f64,
    pub t_hi: f64,
    /// `t` of the triple achieving the maximum.
    pub witness_t: f64,
    pub max_ratio: f64,
    pub count: usize,
    pub witness: Witness,
}

/// Empirical lower envelope for a quasisymmetry modulus. Empty buckets are
/// absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EtaEnvelope {
    pub buckets: Vec<EtaBucket>,
    /// Triples that were degenerate or fell outside the bucket range.
    pub skipped: usize,
}

impl EtaEnvelope {
    /// `(t, maxRatio)` per nonempty bucket.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.buckets.iter().map(|b| (b.witness_t, b.max_ratio)).collect()
    }
}

#[derive(Debug, Clone)]
struct TripleRecord {
    x: Point,
    a: Point,
    b: Point,
    e_a: f64,
    e_b: f64,
    nu_a: f64,
    nu_b: f64,
    img_a: f64,
    img_b: f64,
}

fn triple_sweep(eval: &Evaluator, plan: &SamplingPlan) -> (Vec<TripleRecord>, usize) {
    let out: Vec<Option<TripleRecord>> = plan
        .triples()
        .into_par_iter()
        .map(|(x, a, b)| {
            if x == a || x == b {
                return None;
            }
            let qa = eval.pair(&x, &a, &[]).ok()?;
            let qb = eval.pair(&x, &b, &[]).ok()?;
            Some(TripleRecord {
                e_a: x.distance(&a),
                e_b: x.distance(&b),
                nu_a: qa.seg_mass,
                nu_b: qb.seg_mass,
                img_a: qa.delta_f_norm(),
                img_b: qb.delta_f_norm(),
                x,
                a,
                b,
            })
        })
        .collect();
    let skipped = out.iter().filter(|r| r.is_none()).count();
    (out.into_iter().flatten().collect(), skipped)
}

fn envelope(records: &[TripleRecord], skipped: usize, tr: impl Fn(&TripleRecord) -> (f64, f64)) -> EtaEnvelope {
    let (lo, hi) = (ETA_RANGE.0.log10(), ETA_RANGE.1.log10());
    let width = (hi - lo) / ETA_BUCKETS as f64;
    let mut slots: Vec<Option<EtaBucket>> = vec![None; ETA_BUCKETS];
    let mut skipped = skipped;
    for r in records {
        let (t, ratio) = tr(r);
        if !(t.is_finite() && ratio.is_finite() && t >= ETA_RANGE.0 && t <= ETA_RANGE.1) {
            skipped += 1;
            continue;
        }
        let k = (((t.log10() - lo) / width) as usize).min(ETA_BUCKETS - 1);
        let slot = &mut slots[k];
        match slot {
            Some(b) => {
                b.count += 1;
                if ratio > b.max_ratio {
                    b.max_ratio = ratio;
                    b.witness_t = t;
                    b.witness = Witness::Triple { x: r.x.clone(), a: r.a.clone(), b: r.b.clone() };
                }
            }
            None => {
                *slot = Some(EtaBucket {
                    t_lo: 10f64.powf(lo + k as f64 * width),
                    t_hi: 10f64.powf(lo + (k + 1) as f64 * width),
                    witness_t: t,
                    max_ratio: ratio,
                    count: 1,
                    witness: Witness::Triple { x: r.x.clone(), a: r.a.clone(), b: r.b.clone() },
                })
            }
        }
    }
    EtaEnvelope {
        buckets: slots.into_iter().flatten().collect(),
        skipped,
    }
}

fn eta_of(records: &[TripleRecord], skipped: usize, metric: Metric) -> EtaEnvelope {
    envelope(records, skipped, |r| {
        let t = match metric {
            Metric::Euclidean => r.e_a / r.e_b,
            Metric::Nu => r.nu_a / r.nu_b,
        };
        (t, r.img_a / r.img_b)
    })
}

fn id_probe_of(records: &[TripleRecord], skipped: usize) -> EtaEnvelope {
    envelope(records, skipped, |r| (r.nu_a / r.nu_b, r.e_a / r.e_b))
}

/// Max of `|f(x) - f(a)| / |f(x) - f(b)|` per bucket of `t = d(x,a)/d(x,b)`.
pub fn eta_hat(f: &EmbeddingMap, metric: Metric, plan: &SamplingPlan) -> Result<EtaEnvelope> {
    plan.check()?;
    let (rs, skipped) = triple_sweep(f.evaluator(), plan);
    Ok(eta_of(&rs, skipped, metric))
}

/// Envelope of the identity map from `(Ω, d_ν)` to `(Ω, d_e)`.
pub fn id_qs_probe(nu: &Arc<HyperplaneMeasure>, plan: &SamplingPlan) -> Result<EtaEnvelope> {
    plan.check()?;
    let (rs, skipped) = triple_sweep(&Evaluator::best(nu.clone())?, plan);
    Ok(id_probe_of(&rs, skipped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CyclicResult {
    /// Largest `Σ⟨f(x_k), x_{k+1} - x_k⟩ / Σ|f(x_k)||x_{k+1} - x_k|`.
    pub worst: f64,
    pub worst_sum: f64,
    pub witness: Option<Witness>,
    pub skipped: usize,
}

/// Worst normalized cyclic sum over the plan's cycles.
pub fn cyclic_audit(f: &EmbeddingMap, plan: &SamplingPlan) -> Result<CyclicResult> {
    plan.check()?;
    let cycles = plan.cycles();
    let sums: Vec<Option<(f64, f64)>> = cycles
        .par_iter()
        .map(|c| {
            let images = c.iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
            let m = c.len();
            let (mut sum, mut scale) = (0.0, 0.0);
            for k in 0..m {
                let step = c[(k + 1) % m].sub(&c[k]);
                sum += images[k].dot(&step);
                scale += images[k].norm() * step.norm();
            }
            Ok((scale > 0.0).then_some((sum / scale, sum)))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, f64, usize)> = None;
    for (i, s) in sums.iter().enumerate() {
        if let Some((v, raw)) = s {
            if best.is_none_or(|(b, _, _)| *v > b) {
                best = Some((*v, *raw, i));
            }
        }
    }
    let skipped = sums.iter().filter(|s| s.is_none()).count();
    Ok(match best {
        Some((worst, worst_sum, i)) => CyclicResult {
            worst,
            worst_sum,
            witness: Some(Witness::Cycle { points: cycles[i].clone() }),
            skipped,
        },
        None => CyclicResult {
            worst: f64::NEG_INFINITY,
            worst_sum: 0.0,
            witness: None,
            skipped,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CubeResult {
    /// Smallest `diam f(vertices Q) / ν(πQ)`.
    pub worst: f64,
    pub bound: f64,
    pub witness: Option<Witness>,
}

fn cube_mass(f: &EmbeddingMap, q: &Cube, seed: u64) -> Result<f64> {
    match f.evaluator().cube_mass(q) {
        Err(Error::UnsupportedBackend { .. }) => {
            Ok(mc_estimate(f.measure(), &McQuery::CubeMass(q.clone()), DEFAULT_MC_BUDGET, seed)?.value())
        }
        r => r,
    }
}

/// Worst vertex-diameter ratio over the plan's cubes.
pub fn cube_audit(f: &EmbeddingMap, plan: &SamplingPlan) -> Result<CubeResult> {
    plan.check()?;
    let cubes = plan.cubes();
    let ratios: Vec<f64> = cubes
        .par_iter()
        .map(|q| {
            let imgs = q.vertices().iter().map(|v| f.eval(v)).collect::<Result<Vec<_>>>()?;
            let mut diam: f64 = 0.0;
            for i in 0..imgs.len() {
                for j in i + 1..imgs.len() {
                    diam = diam.max((&imgs[i] - &imgs[j]).norm());
                }
            }
            Ok(diam / cube_mass(f, q, plan.seed)?)
        })
        .collect::<Result<_>>()?;
    let idx: Vec<usize> = (0..cubes.len()).collect();
    let best = min_by(&idx, |&i| ratios[i]);
    Ok(CubeResult {
        worst: best.map_or(f64::INFINITY, |b| b.0),
        bound: cube_constant(plan.dim()),
        witness: best.map(|(_, &i)| Witness::Cube {
            center: cubes[i].center().clone(),
            edge: cubes[i].edge(),
        }),
    })
}

/// One pass/fail check. `relation` reads `value <= bound` or `value >= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Audit {
    pub name: String,
    pub relation: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
    pub witness: Option<Witness>,
}

impl Audit {
    pub fn at_most(name: &str, value: f64, bound: f64, witness: Option<Witness>) -> Self {
        Self {
            name: name.into(),
            relation: "<=".into(),
            value,
            bound,
            passed: value <= bound,
            witness,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64, witness: Option<Witness>) -> Self {
        Self {
            name: name.into(),
            relation: ">=".into(),
            value,
            bound,
            passed: value >= bound,
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticsReport {
    pub backend: Backend,
    pub plan: SamplingPlan,
    pub pairs: usize,
    pub kappa_hat: Estimate,
    /// `None` when the backend has no angle profile.
    pub tau_hat: Option<TauEstimate>,
    pub tau_converse: Option<ConverseCheck>,
    pub delta_hat: Estimate,
    pub bilip: Bilip,
    pub eta_euclidean: EtaEnvelope,
    pub eta_nu: EtaEnvelope,
    pub id_probe: EtaEnvelope,
    pub cyclic: CyclicResult,
    pub cube: CubeResult,
    pub audits: Vec<Audit>,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> bool {
        self.audits.iter().all(|a| a.passed)
    }

    pub fn failed(&self) -> Vec<&Audit> {
        self.audits.iter().filter(|a| !a.passed).collect()
    }

    pub fn audit(&self, name: &str) -> Option<&Audit> {
        self.audits.iter().find(|a| a.name == name)
    }
}

/// Pairwise audits that only need the pair sweep.
pub fn pair_audits(records: &[PairRecord]) -> Vec<Audit> {
    let rel = |r: &PairRecord| r.q.seg_mass.max(1.0);
    let lip = max_by(records, |r| (r.q.delta_f_norm() - r.q.seg_mass) / rel(r));
    let low = max_by(records, |r| (r.q.transversal - r.q.delta_f_norm()) / rel(r));
    let ident = max_by(records, |r| {
        let rhs = r.length() * r.q.transversal;
        (r.inner() - rhs).abs() / rhs.max(f64::MIN_POSITIVE)
    });
    let dom = min_by(records, |r| r.delta() - r.kappa());
    let mk = |b: Option<(f64, &PairRecord)>| (b.map_or(f64::NAN, |b| b.0), b.map(|b| b.1.witness()));
    let (v, w) = mk(lip);
    let mut out = vec![Audit::at_most("lipschitz", v, LIPSCHITZ_TOL, w)];
    let (v, w) = mk(low);
    out.push(Audit::at_most("lowerBound", v, LIPSCHITZ_TOL, w));
    let (v, w) = mk(ident);
    out.push(Audit::at_most("identity", v, IDENTITY_TOL, w));
    let (v, w) = mk(dom);
    out.push(Audit::at_least("deltaDominatesKappa", v, -CHAIN_TOL, w));
    out
}

/// Runs every estimator and audit on the plan.
pub fn run_diagnostics(f: &EmbeddingMap, plan: &SamplingPlan) -> Result<DiagnosticsReport> {
    plan.check()?;
    let eval = f.evaluator();
    let (records, has_profile) = sweep_with_profile(eval, plan)?;
    let kappa = kappa_from(&records)?;
    let delta = delta_from(&records)?;
    let bilip = bilip_from(&records)?;
    let tau = has_profile.then(|| tau_from(&records));
    let converse = if has_profile {
        converse_check(eval, &records, kappa.value)?
    } else {
        None
    };
    let (triples, skipped) = triple_sweep(eval, plan);
    let cyclic = cyclic_audit(f, plan)?;
    let cube = cube_audit(f, plan)?;

    let mut audits = pair_audits(&records);
    audits.push(Audit::at_least("deltaNonnegative", delta.value, -LIPSCHITZ_TOL, delta.witness.clone()));
    if let Some(t) = &tau {
        let v = kappa.value - t.tau_hat * t.tau_hat.sin();
        audits.push(Audit::at_least("kappaTauChain", v, -CHAIN_TOL, kappa.witness.clone()));
    }
    if let Some(c) = &converse {
        audits.push(Audit::at_least("tauConverse", c.margin, -CHAIN_TOL, c.witness.clone()));
    }
    audits.push(Audit::at_most(
        "bilipHigh",
        bilip.c_high.value,
        1.0 + LIPSCHITZ_TOL,
        bilip.c_high.witness.clone(),
    ));
    audits.push(Audit::at_least(
        "bilipLowVsKappa",
        bilip.c_low.value - kappa.value,
        -CHAIN_TOL,
        bilip.c_low.witness.clone(),
    ));
    audits.push(Audit::at_most("cyclic", cyclic.worst, CYCLIC_TOL, cyclic.witness.clone()));
    audits.push(Audit::at_least("cube", cube.worst, cube.bound - CUBE_TOL, cube.witness.clone()));

    Ok(DiagnosticsReport {
        backend: f.backend(),
        plan: plan.clone(),
        pairs: records.len(),
        kappa_hat: kappa,
        tau_hat: tau,
        tau_converse: converse,
        delta_hat: delta,
        bilip,
        eta_euclidean: eta_of(&triples, skipped, Metric::Euclidean),
        eta_nu: eta_of(&triples, skipped, Metric::Nu),
        id_probe: id_probe_of(&triples, skipped),
        cyclic,
        cube,
        audits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxRegion;
    use std::f64::consts::PI;

    fn crofton_map(n: usize) -> EmbeddingMap {
        let nu = Arc::new(HyperplaneMeasure::crofton(n, 1.0).unwrap());
        EmbeddingMap::with_best_backend(nu, Point::origin(n).unwrap()).unwrap()
    }

    fn plan(n: usize) -> SamplingPlan {
        SamplingPlan::new(BoxRegion::centered_cube(n, 1.0).unwrap(), 7).with_counts(200, 200, 100, 40)
    }

    #[test]
    fn crofton_closed_form_values() {
        let f = crofton_map(2);
        let r = run_diagnostics(&f, &plan(2)).unwrap();
        assert!(r.passed(), "{:?}", r.failed());
        assert!((r.kappa_hat.value - PI / 4.0).abs() < 1e-9);
        assert!((r.delta_hat.value - 1.0).abs() < 1e-9);
        assert!((r.bilip.c_low.value - PI / 4.0).abs() < 1e-9);
        assert!((r.bilip.c_high.value - PI / 4.0).abs() < 1e-9);
        for b in &r.eta_euclidean.buckets {
            assert!((b.max_ratio - b.witness_t).abs() < 1e-9 * b.witness_t.max(1.0));
        }
        let tau = r.tau_hat.unwrap().tau_hat;
        assert!(tau > 0.0 && (r.kappa_hat.value - tau * tau.sin()) >= -1e-10);
    }

    #[test]
    fn crofton_tau_grid_anchor() {
        // ν{α >= τ}/ν = cos τ for n = 2, so τ̂ is the largest grid τ with cos τ >= τ.
        let r = tau_hat(crofton_map(2).measure(), &plan(2)).unwrap();
        let expected = tau_grid().into_iter().filter(|t| t.cos() >= *t).fold(0.0, f64::max);
        assert_eq!(r.tau_hat, expected);
    }

    #[test]
    fn crofton_cube_ratio_unit_square() {
        let f = crofton_map(2);
        let q = Cube::new(Point::origin(2).unwrap(), 1.0).unwrap();
        let diam = (f.eval(&Point::from_slice(&[0.5, 0.5]).unwrap()).unwrap()
            - f.eval(&Point::from_slice(&[-0.5, -0.5]).unwrap()).unwrap())
        .norm();
        let ratio = diam / f.evaluator().cube_mass(&q).unwrap();
        assert!((ratio - (2f64.sqrt() / 2.0) / (4.0 / PI)).abs() < 1e-12);
        assert!((cube_constant(2) - 0.0442).abs() < 1e-4);
        assert!((cube_constant(3) - 0.00902).abs() < 1e-5);
    }

    #[test]
    fn crofton_cycle_sum_matches_linear_identity() {
        let f = crofton_map(2);
        let pts: Vec<Point> = [[0.1, 0.2], [0.7, -0.3], [-0.4, 0.5]]
            .iter()
            .map(|c| Point::from_slice(c).unwrap())
            .collect();
        let m = pts.len();
        let mut sum = 0.0;
        let mut expect = 0.0;
        for k in 0..m {
            let step = pts[(k + 1) % m].sub(&pts[k]);
            sum += f.eval(&pts[k]).unwrap().dot(&step);
            expect -= step.norm_squared() / 4.0;
        }
        assert!((sum - expect).abs() < 1e-12);
    }

    #[test]
    fn crofton_three_dimensions() {
        let f = crofton_map(3);
        let p = plan(3).with_counts(100, 100, 50, 30);
        let r = run_diagnostics(&f, &p).unwrap();
        assert!(r.passed(), "{:?}", r.failed());
        assert!((r.delta_hat.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scale_equivariance() {
        let nu = HyperplaneMeasure::crofton(2, 1.0).unwrap();
        let o = Point::origin(2).unwrap();
        let p = plan(2).with_counts(60, 60, 30, 20);
        let a = run_diagnostics(&EmbeddingMap::with_best_backend(Arc::new(nu.clone()), o.clone()).unwrap(), &p).unwrap();
        let b = run_diagnostics(
            &EmbeddingMap::with_best_backend(Arc::new(nu.scaled(3.5).unwrap()), o).unwrap(),
            &p,
        )
        .unwrap();
        assert!((a.kappa_hat.value - b.kappa_hat.value).abs() < 1e-10);
        assert!((a.delta_hat.value - b.delta_hat.value).abs() < 1e-10);
        assert!((a.cube.worst - b.cube.worst).abs() < 1e-10);
        assert_eq!(a.tau_hat.unwrap().tau_hat, b.tau_hat.unwrap().tau_hat);
        for (x, y) in a.eta_euclidean.samples().iter().zip(b.eta_euclidean.samples()) {
            assert!((x.1 - y.1).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_mass_segment_is_reported() {
        use crate::measure::{ArcPiece, BaseMeasure1D, DirectionMeasure};
        // all hyperplanes are vertical lines with offsets in [5, 6]
        let nu = HyperplaneMeasure::offset_direction(
            2,
            DirectionMeasure::arc_density(vec![
                ArcPiece { lo: 0.0, hi: 0.01, density: 1.0 },
                ArcPiece { lo: PI - 0.01, hi: PI, density: 1.0 },
            ])
            .unwrap(),
            BaseMeasure1D::uniform(5.0, 6.0, 1.0).unwrap(),
        )
        .unwrap();
        let r = kappa_hat(&Arc::new(nu), &plan(2));
        assert!(matches!(r, Err(Error::AdmissibilityViolation(_))));
    }
}
