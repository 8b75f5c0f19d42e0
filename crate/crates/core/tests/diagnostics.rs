//! Estimators and audits on measures whose answers are known in closed form.

use std::f64::consts::{FRAC_PI_4, PI};

use busemann::diagnostics::{
    cube_constant, cyclic_audit, delta_hat, eta_hat, id_qs_probe, kappa_hat, pair_sweep, tau_hat, Metric,
};
use busemann::prelude::*;

fn pt(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

fn cycle_sum(f: &EmbeddingMap, pts: &[Point]) -> f64 {
    let m = pts.len();
    (0..m)
        .map(|k| {
            let fx = f.eval(&pts[k]).unwrap();
            fx.dot(&pts[(k + 1) % m].sub(&pts[k]))
        })
        .sum()
}

#[test]
fn crofton_estimators() {
    let s = build_crofton(2).unwrap();
    let f = s.embedding().unwrap();
    let plan = s.plan(3).with_counts(300, 200, 100, 50);
    assert!((kappa_hat(&s.measure, &plan).unwrap().value - FRAC_PI_4).abs() < 1e-12);
    assert!((delta_hat(&f, &plan).unwrap().value - 1.0).abs() < 1e-9);
    let t = tau_hat(&s.measure, &plan).unwrap();
    assert!(t.tau_hat > 0.0);
    assert!(FRAC_PI_4 >= t.tau_hat * t.tau_hat.sin() - 1e-10);
}

#[test]
fn similarity_envelope_is_the_identity() {
    let s = build_crofton(2).unwrap();
    let f = s.embedding().unwrap();
    let plan = s.plan(4).with_counts(10, 2000, 10, 10);
    let env = eta_hat(&f, Metric::Euclidean, &plan).unwrap();
    assert!(env.buckets.len() > 10);
    for b in &env.buckets {
        assert!((b.max_ratio - b.witness_t).abs() <= 1e-9 * b.witness_t.max(1.0), "{b:?}");
        assert!(b.t_lo <= b.witness_t && b.witness_t <= b.t_hi);
    }
    let id = id_qs_probe(&s.measure, &plan).unwrap();
    for b in &id.buckets {
        assert!((b.max_ratio - b.witness_t).abs() <= 1e-9 * b.witness_t.max(1.0));
    }
}

#[test]
fn linear_map_cycle_identity() {
    let s = build_crofton(2).unwrap();
    let f = s.embedding().unwrap();
    let pts = vec![pt(&[0.1, 0.2]), pt(&[0.7, 0.3]), pt(&[0.5, 0.9]), pt(&[0.2, 0.6])];
    let want: f64 = -0.25
        * (0..4)
            .map(|k| pts[(k + 1) % 4].sub(&pts[k]).norm_squared())
            .sum::<f64>();
    let got = cycle_sum(&f, &pts);
    assert!((got - want).abs() < 1e-14);
    let mut rotated = pts.clone();
    rotated.rotate_left(1);
    assert!((cycle_sum(&f, &rotated) - got).abs() < 1e-14);
    let reversed: Vec<Point> = pts.iter().rev().cloned().collect();
    assert!(cycle_sum(&f, &reversed) <= 1e-10);
}

#[test]
fn two_point_cycles_are_monotonicity() {
    let s = build_degenerate_family(0.2).unwrap();
    let f = s.embedding().unwrap();
    let (x, y) = (pt(&[0.3, -0.2]), pt(&[-0.4, 0.5]));
    let df = f.difference(&x, &y).unwrap();
    let via_cycle = cycle_sum(&f, &[x.clone(), y.clone()]);
    assert!((via_cycle + df.dot(&x.sub(&y))).abs() < 1e-12);
    assert!(via_cycle <= 0.0);
    let plan = s.plan(8).with_counts(10, 10, 300, 10);
    assert!(cyclic_audit(&f, &plan).unwrap().worst <= 1e-10);
}

#[test]
fn cube_constants_and_unit_square() {
    assert!((cube_constant(2) - 0.0442).abs() < 1e-4);
    assert!((cube_constant(3) - 0.00902).abs() < 1e-5);
    let s = build_crofton(2).unwrap();
    let f = s.embedding().unwrap();
    let q = Cube::new(pt(&[0.5, 0.5]), 1.0).unwrap();
    let v = q.vertices();
    let mut diam: f64 = 0.0;
    for a in &v {
        for b in &v {
            diam = diam.max(f.difference(a, b).unwrap().norm());
        }
    }
    let ratio = diam / f.evaluator().cube_mass(&q).unwrap();
    assert!((ratio - (2f64.sqrt() / 2.0) / (4.0 / PI)).abs() < 1e-14);
    assert!((ratio - 0.555).abs() < 1e-3);
}

#[test]
fn diagonal_segments_of_the_degenerate_family() {
    let theta0 = 0.05;
    let s = build_degenerate_family(theta0).unwrap();
    let e = Evaluator::new(s.measure.clone(), Backend::Exact2D).unwrap();
    let segs: Vec<(Point, Point)> = (0..20)
        .map(|k| {
            let c = -0.8 + 0.07 * k as f64;
            let l = 0.01 + 0.04 * k as f64;
            (pt(&[c, -c * 0.5]), pt(&[c + l, -c * 0.5 + l]))
        })
        .collect();
    let recs = pair_sweep(&e, &segs, &[]).unwrap();
    // normals lie within θ₀ of e₁ or e₂, so sin α lies in [sin(π/4 - θ₀), sin(π/4 + θ₀)]
    let (lo, hi) = ((FRAC_PI_4 - theta0).sin(), (FRAC_PI_4 + theta0).sin());
    for r in &recs {
        let k = r.kappa();
        assert!(lo - 1e-12 <= k && k <= hi + 1e-12, "{k}");
    }
}

#[test]
fn axis_segments_of_the_degenerate_family_stay_transverse() {
    let s = build_degenerate_family(0.05).unwrap();
    let e = Evaluator::new(s.measure.clone(), Backend::Exact2D).unwrap();
    let segs = vec![(pt(&[-0.5, 0.1]), pt(&[0.5, 0.1])), (pt(&[0.2, -0.7]), pt(&[0.2, 0.6]))];
    for r in pair_sweep(&e, &segs, &[]).unwrap() {
        assert!(r.kappa() > (FRAC_PI_4 - 0.05).sin());
    }
}

#[test]
fn full_report_passes_and_serializes() {
    let s = build_crofton(2).unwrap();
    let f = s.embedding().unwrap();
    let report = run_diagnostics(&f, &s.plan(1).with_counts(50, 20, 20, 20)).unwrap();
    assert!(report.passed());
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("\"kappaHat\""));
}
