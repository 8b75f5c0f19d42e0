//! Segment masses, transversal integrals, embeddings and cube masses on
//! configurations with known values, checked against closed forms and
//! independent Monte Carlo sign tests.

use std::f64::consts::PI;
use std::sync::Arc;

use busemann::evaluators::{
    calibrate_kmw_constant_unchecked, kmw_constant_analytic, mc_estimate, McQuery,
};
use busemann::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

fn atom_at_origin() -> Arc<HyperplaneMeasure> {
    let mu = BaseMeasureND::atomic(vec![(pt(&[0.0, 0.0]), 1.0)]).unwrap();
    Arc::new(HyperplaneMeasure::position_direction(BaseMeasure::Spatial(mu), DirectionMeasure::Uniform).unwrap())
}

fn crofton2() -> Arc<HyperplaneMeasure> {
    Arc::new(HyperplaneMeasure::crofton(2, 1.0).unwrap())
}

fn mc(budget: u64, seed: u64) -> Backend {
    Backend::MonteCarlo { budget, seed }
}

#[test]
fn coincident_points_have_zero_mass() {
    for nu in [atom_at_origin(), crofton2()] {
        let e = Evaluator::best(nu).unwrap();
        let x = pt(&[0.3, 0.4]);
        assert_eq!(e.seg_mass(&x, &x).unwrap(), 0.0);
    }
}

#[test]
fn atom_quarter_circle_against_sign_test() {
    let nu = atom_at_origin();
    let (x, y) = (pt(&[1.0, 0.0]), pt(&[0.0, 1.0]));
    for backend in [Backend::ClosedForm, Backend::Exact2D] {
        let d = Evaluator::new(nu.clone(), backend).unwrap().seg_mass(&x, &y).unwrap();
        assert!((d - 0.5).abs() < 1e-14, "{}: {d}", backend.name());
    }
    // independent oracle: uniform v on the circle, count sign changes
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 200_000;
    let hits = (0..n)
        .filter(|_| {
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            let (s, c) = t.sin_cos();
            (c > 0.0) != (s > 0.0)
        })
        .count();
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((p - 0.5).abs() < 4.0 * se);
}

#[test]
fn monte_carlo_quarter_circle_within_three_sigma() {
    let q = McQuery::SegMass {
        x: pt(&[1.0, 0.0]),
        y: pt(&[0.0, 1.0]),
    };
    let e = mc_estimate(&atom_at_origin(), &q, 1 << 18, 4).unwrap();
    assert!((e.value() - 0.5).abs() < 3.0 * e.std_error(), "{e:?}");
}

#[test]
fn crofton_segment_mass_and_transversal() {
    let e = Evaluator::best(crofton2()).unwrap();
    for l in [0.01, 1.0, 7.5] {
        let (x, y) = (pt(&[0.0, 0.0]), pt(&[l, 0.0]));
        let q = e.pair(&x, &y, &[]).unwrap();
        assert!((q.seg_mass - 2.0 / PI * l).abs() < 1e-14 * l.max(1.0));
        assert!((q.transversal - 0.5 * l).abs() < 1e-14 * l.max(1.0));
    }
    let m = Evaluator::new(crofton2(), mc(1 << 18, 8)).unwrap();
    let q = m.pair(&pt(&[0.0, 0.0]), &pt(&[2.0, 0.0]), &[]).unwrap();
    let se = q.std_errors.unwrap();
    assert!((q.seg_mass - 4.0 / PI).abs() < 4.0 * se[0]);
    assert!((q.transversal - 1.0).abs() < 4.0 * se[1]);
}

#[test]
fn embedding_values() {
    let f = EmbeddingMap::with_best_backend(crofton2(), pt(&[0.0, 0.0])).unwrap();
    assert_eq!(f.eval(&pt(&[0.0, 0.0])).unwrap().as_slice(), &[0.0, 0.0]);
    let v = f.eval(&pt(&[3.0, 4.0])).unwrap();
    assert!((v[0] - 1.5).abs() < 1e-14 && (v[1] - 2.0).abs() < 1e-14);
    let m = EmbeddingMap::new(crofton2(), pt(&[0.0, 0.0]), mc(1 << 18, 2)).unwrap();
    let q = m.evaluator().pair(&pt(&[3.0, 4.0]), &pt(&[0.0, 0.0]), &[]).unwrap();
    let se = q.std_errors.unwrap();
    assert!((q.delta_f[0] - 1.5).abs() < 4.0 * se[2]);
    assert!((q.delta_f[1] - 2.0).abs() < 4.0 * se[3]);
}

#[test]
fn single_atom_embedding_uses_pushforward_constant() {
    let nu = atom_at_origin();
    let (o, x) = (pt(&[1.0, 0.0]), pt(&[0.0, 1.0]));
    let c = kmw_constant_analytic(2);
    assert!((c - 1.0 / PI).abs() < 1e-15);
    for backend in [Backend::ClosedForm, Backend::Exact2D] {
        let v = EmbeddingMap::new(nu.clone(), o.clone(), backend).unwrap().eval(&x).unwrap();
        assert!((v[0] + c).abs() < 1e-12 && (v[1] - c).abs() < 1e-12, "{}: {v:?}", backend.name());
    }
    let e = mc_estimate(&nu, &McQuery::Embed { o, x }, 1 << 20, 6).unwrap();
    assert!((e.values[0] + c).abs() < 4.0 * e.std_errors[0]);
    assert!((e.values[1] - c).abs() < 4.0 * e.std_errors[1]);
}

#[test]
fn unit_square_cube_mass() {
    let q = Cube::new(pt(&[0.5, 0.5]), 1.0).unwrap();
    let m = Evaluator::best(crofton2()).unwrap().cube_mass(&q).unwrap();
    assert!((m - 4.0 / PI).abs() < 1e-14);
    let e = mc_estimate(&crofton2(), &McQuery::CubeMass(q.clone()), 1 << 18, 3).unwrap();
    assert!((e.value() - 4.0 / PI).abs() < 4.0 * e.std_error());
    let d = Evaluator::best(crofton2()).unwrap().seg_mass(&pt(&[0.1, 0.2]), &pt(&[0.9, 0.7])).unwrap();
    assert!(m >= d);
}

#[test]
fn exact_planar_cube_mass_matches_monte_carlo() {
    let s = build_degenerate_family(0.3).unwrap();
    let q = Cube::new(pt(&[0.2, -0.1]), 0.5).unwrap();
    let exact = Evaluator::new(s.measure.clone(), Backend::Exact2D).unwrap().cube_mass(&q).unwrap();
    let e = mc_estimate(&s.measure, &McQuery::CubeMass(q), 1 << 20, 12).unwrap();
    assert!((exact - e.value()).abs() < 4.0 * e.std_error(), "{exact} vs {e:?}");
}

#[test]
fn monte_carlo_error_shrinks_with_budget() {
    let q = McQuery::SegMass {
        x: pt(&[1.0, 0.0]),
        y: pt(&[0.0, 1.0]),
    };
    let nu = atom_at_origin();
    let ratios: Vec<f64> = (0..30)
        .map(|k| {
            let a = mc_estimate(&nu, &q, 1 << 14, 100 + k).unwrap().std_error();
            let b = mc_estimate(&nu, &q, 1 << 15, 200 + k).unwrap().std_error();
            b / a
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean * 2f64.sqrt() - 1.0).abs() < 0.2, "mean ratio {mean}");
}

#[test]
fn monte_carlo_is_bit_identical_under_a_fixed_seed() {
    let s = build_degenerate_family(0.2).unwrap();
    let q = McQuery::Pair {
        x: pt(&[-0.3, 0.1]),
        y: pt(&[0.5, 0.6]),
        taus: vec![0.1, 0.5],
    };
    let a = mc_estimate(&s.measure, &q, 100_000, 77).unwrap();
    let b = mc_estimate(&s.measure, &q, 100_000, 77).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pushforward_constant_calibration() {
    let c3 = calibrate_kmw_constant_unchecked(3, 600_000, 5).unwrap();
    assert!(c3.value > 0.0 && c3.contains(0.25), "{c3:?}");
    assert_eq!(c3, calibrate_kmw_constant_unchecked(3, 600_000, 5).unwrap());

    let tiny = calibrate_kmw_constant_unchecked(2, 10, 5).unwrap();
    assert!(tiny.warning.is_some());
    assert_eq!(tiny.independence_check, None);
}

#[test]
fn backends_agree_on_atoms() {
    let atoms = vec![
        (pt(&[2.0, 1.0]), 1.0),
        (pt(&[-1.5, 2.5]), 0.7),
        (pt(&[0.5, -3.0]), 1.3),
    ];
    let mu = BaseMeasureND::atomic(atoms).unwrap();
    let nu = Arc::new(HyperplaneMeasure::position_direction(BaseMeasure::Spatial(mu), DirectionMeasure::Uniform).unwrap());
    let taus: Vec<f64> = (1..=15).map(|k| 0.1 * k as f64).collect();
    let closed = Evaluator::new(nu.clone(), Backend::ClosedForm).unwrap();
    let exact = Evaluator::new(nu, Backend::Exact2D).unwrap();
    let (x, y) = (pt(&[-0.4, 0.3]), pt(&[0.8, -0.6]));
    let a = closed.pair(&x, &y, &taus).unwrap();
    let b = exact.pair(&x, &y, &taus).unwrap();
    assert!((a.seg_mass - b.seg_mass).abs() < 1e-12);
    assert!((a.transversal - b.transversal).abs() < 1e-12);
    for k in 0..2 {
        assert!((a.delta_f[k] - b.delta_f[k]).abs() < 1e-12);
    }
    for ((t, pa), pb) in taus.iter().zip(&a.profile).zip(&b.profile) {
        assert!((pa - pb).abs() < 1e-12, "tau {t}");
    }
}
