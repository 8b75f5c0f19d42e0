//! Metric and monotonicity invariants over random points and measures.

use std::sync::Arc;

use busemann::prelude::*;
use proptest::prelude::*;

fn pt(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

fn shift(x: &Point, v: &Point) -> Point {
    x.translated(v.as_vector())
}

fn scaled(x: &Point, s: f64) -> Point {
    Point::from_vector(x.as_vector() * s).unwrap()
}

fn coord() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn point2() -> impl Strategy<Value = Point> {
    (coord(), coord()).prop_map(|(a, b)| pt(&[a, b]))
}

fn degenerate(theta0: f64) -> Arc<HyperplaneMeasure> {
    build_degenerate_family(theta0).unwrap().measure
}

fn atoms() -> Arc<HyperplaneMeasure> {
    let mu = BaseMeasureND::atomic(vec![
        (pt(&[0.3, 0.1]), 1.0),
        (pt(&[-0.6, 0.5]), 0.5),
        (pt(&[0.2, -0.7]), 2.0),
    ])
    .unwrap();
    Arc::new(HyperplaneMeasure::position_direction(BaseMeasure::Spatial(mu), DirectionMeasure::Uniform).unwrap())
}

fn measures() -> impl Strategy<Value = Arc<HyperplaneMeasure>> {
    prop_oneof![
        Just(Arc::new(HyperplaneMeasure::crofton(2, 1.0).unwrap())),
        (0.05..1.5f64).prop_map(degenerate),
        Just(atoms()),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_axioms(nu in measures(), x in point2(), y in point2(), z in point2()) {
        let e = Evaluator::best(nu).unwrap();
        let dxy = e.seg_mass(&x, &y).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert!(close(dxy, e.seg_mass(&y, &x).unwrap(), 1e-12));
        let dxz = e.seg_mass(&x, &z).unwrap();
        let dzy = e.seg_mass(&z, &y).unwrap();
        prop_assert!(dxy <= dxz + dzy + 1e-9);
    }

    #[test]
    fn additive_along_segments(nu in measures(), x in point2(), y in point2(), t in 0.05..0.95f64) {
        let e = Evaluator::best(nu).unwrap();
        let m = x.lerp(&y, t);
        let whole = e.seg_mass(&x, &y).unwrap();
        let parts = e.seg_mass(&x, &m).unwrap() + e.seg_mass(&m, &y).unwrap();
        prop_assert!(close(parts, whole, 1e-9), "{parts} vs {whole}");
    }

    #[test]
    fn embedding_is_monotone_and_lipschitz(nu in measures(), o in point2(), x in point2(), y in point2()) {
        let f = EmbeddingMap::with_best_backend(nu, o.clone()).unwrap();
        prop_assert_eq!(f.eval(&o).unwrap().norm(), 0.0);
        let q = f.evaluator().pair(&x, &y, &[]).unwrap();
        let df = Vector::from_vec(q.delta_f.clone());
        let d = q.seg_mass;
        prop_assert!(df.norm() <= d + 1e-9 * d.max(1.0));
        prop_assert!(df.dot(&x.sub(&y)) >= -1e-12);
        prop_assert!(q.transversal <= d + 1e-12);
        let diff = f.difference(&x, &y).unwrap();
        for k in 0..2 {
            prop_assert!(close(diff[k], q.delta_f[k], 1e-9));
        }
    }

    #[test]
    fn crofton_is_equivariant(x in point2(), y in point2(), v in point2(), s in 0.1..10.0f64) {
        let e = Evaluator::best(Arc::new(HyperplaneMeasure::crofton(2, 1.0).unwrap())).unwrap();
        let d = e.seg_mass(&x, &y).unwrap();
        prop_assert!(close(e.seg_mass(&shift(&x, &v), &shift(&y, &v)).unwrap(), d, 1e-12));
        prop_assert!(close(e.seg_mass(&scaled(&x, s), &scaled(&y, s)).unwrap(), s * d, 1e-12));
    }

    #[test]
    fn translating_atoms_with_points(x in point2(), y in point2(), v in point2()) {
        let shifted = BaseMeasureND::atomic(vec![
            (shift(&pt(&[0.3, 0.1]), &v), 1.0),
            (shift(&pt(&[-0.6, 0.5]), &v), 0.5),
            (shift(&pt(&[0.2, -0.7]), &v), 2.0),
        ])
        .unwrap();
        let moved = Arc::new(
            HyperplaneMeasure::position_direction(BaseMeasure::Spatial(shifted), DirectionMeasure::Uniform).unwrap(),
        );
        let a = Evaluator::best(atoms()).unwrap().seg_mass(&x, &y).unwrap();
        let b = Evaluator::best(moved).unwrap().seg_mass(&shift(&x, &v), &shift(&y, &v)).unwrap();
        prop_assert!(close(a, b, 1e-9));
    }
}
