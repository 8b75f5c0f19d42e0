//! Scenario builders, their documented identities and grid export.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

use busemann::diagnostics::kappa_hat;
use busemann::prelude::*;
use busemann::scenarios::GridImage;

fn pt(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

fn rotate(p: &Point, o: &Point, t: f64) -> Point {
    let (s, c) = t.sin_cos();
    let (dx, dy) = (p[0] - o[0], p[1] - o[1]);
    pt(&[o[0] + c * dx - s * dy, o[1] + s * dx + c * dy])
}

#[test]
fn crofton_is_isotropic() {
    let s = build_crofton(2).unwrap();
    let e = s.embedding().unwrap();
    let (x, y) = (pt(&[0.3, 0.1]), pt(&[0.9, 0.8]));
    let d = e.evaluator().seg_mass(&x, &y).unwrap();
    for k in 1..12 {
        let t = 0.5 * k as f64;
        let (xr, yr) = (rotate(&x, &s.basepoint, t), rotate(&y, &s.basepoint, t));
        assert!((e.evaluator().seg_mass(&xr, &yr).unwrap() - d).abs() < 1e-10);
    }
}

#[test]
fn kmw_atoms_validate_and_separate() {
    let mu = BaseMeasureND::atomic(vec![
        (pt(&[3.0, 0.0]), 1.0),
        (pt(&[0.0, 4.0]), 2.0),
        (pt(&[-3.0, -3.0]), 1.0),
    ])
    .unwrap();
    let s = build_kmw(mu, BoxRegion::centered_cube(2, 1.0).unwrap()).unwrap();
    assert!(s.expected.admissible);
    let plan = s.plan(2).with_counts(100, 10, 10, 10);
    assert!(validate(&s.measure, &s.window, &plan).unwrap().passed());
    let e = s.embedding().unwrap();
    for (x, y) in plan.segments() {
        assert!(e.evaluator().seg_mass(&x, &y).unwrap() > 0.0);
    }
}

#[test]
fn kmw_rejects_collinear_support() {
    let mu = BaseMeasureND::atomic(vec![
        (pt(&[1.0, 1.0]), 1.0),
        (pt(&[2.0, 2.0]), 1.0),
        (pt(&[5.0, 5.0]), 1.0),
    ])
    .unwrap();
    assert!(build_kmw(mu, BoxRegion::centered_cube(2, 0.5).unwrap()).is_err());
}

#[test]
fn kmw_box_anchor() {
    let mu = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 100.0).unwrap(), 1.0).unwrap();
    let s = build_kmw(mu, BoxRegion::centered_cube(2, 1.0).unwrap()).unwrap();
    let ratio = s.expected.doubling_ratio.unwrap();
    assert!((ratio - 4.0).abs() < 1e-9);
    let plan = s.plan(20240517).with_counts(200, 10, 10, 10);
    let k = kappa_hat(&s.measure, &plan).unwrap().value;
    assert!(k > 0.0);
    // full caps give the same uniform ω on the same box
    let deg = build_degenerate_family(FRAC_PI_2).unwrap();
    let kd = kappa_hat(&deg.measure, &plan).unwrap().value;
    assert!((k - kd).abs() < 1e-9, "{k} vs {kd}");
    let narrow = build_degenerate_family(0.1).unwrap();
    assert!(kappa_hat(&narrow.measure, &plan).unwrap().value < kd);
}

#[test]
fn beurling_ahlfors_fixes_the_real_axis() {
    let window = BoxRegion::new(vec![-2.0, -1.0], vec![2.0, 1.0]).unwrap();
    let s = build_beurling_ahlfors(BaseMeasure1D::lebesgue(1.0).unwrap(), FRAC_PI_6, window.clone()).unwrap();
    let f = s.embedding().unwrap();
    for (a, b) in [(-1.9, 1.7), (0.0, 0.4), (0.5, 0.5001), (-1.2, -0.3)] {
        let df = f.difference(&pt(&[b, 0.0]), &pt(&[a, 0.0])).unwrap();
        assert!((df[0] - (b - a)).abs() < 1e-8);
        assert!(df[1].abs() < 1e-10);
    }
    let img = grid_export(&s, 9, &window).unwrap();
    for node in img.nodes.iter().filter(|n| n.x[1] == 0.0) {
        assert!((node.fx[0] - node.x[0]).abs() < 1e-8 && node.fx[1].abs() < 1e-8);
    }
}

#[test]
fn beurling_ahlfors_rejects_atoms_in_window() {
    let window = BoxRegion::new(vec![-2.0, -1.0], vec![2.0, 1.0]).unwrap();
    let mu = BaseMeasure1D::atomic(vec![(0.5, 1.0)]).unwrap();
    assert!(build_beurling_ahlfors(mu, FRAC_PI_6, window).is_err());
}

#[test]
fn crofton_grid_is_the_scaled_lattice() {
    for n in [2, 3] {
        let s = build_crofton(n).unwrap();
        let img = grid_export(&s, 5, &s.window).unwrap();
        assert_eq!(img.nodes.len(), 5usize.pow(n as u32));
        for node in &img.nodes {
            for d in 0..n {
                let want = (node.x[d] - s.basepoint[d]) / n as f64;
                assert!((node.fx[d] - want).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn grid_files_round_trip_exactly() {
    let s = build_degenerate_family(0.3).unwrap();
    let img = grid_export(&s, 6, &s.window).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    std::fs::write(&path, img.to_csv()).unwrap();
    let back = GridImage::from_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, img);
    let json = serde_json::to_string(&img).unwrap();
    assert_eq!(serde_json::from_str::<GridImage>(&json).unwrap(), img);
}

#[test]
fn degenerate_family_validates() {
    for theta0 in [0.02, 0.5, FRAC_PI_2] {
        let s = build_degenerate_family(theta0).unwrap();
        let plan = s.plan(6).with_counts(60, 10, 10, 10);
        assert!(validate(&s.measure, &s.window, &plan).unwrap().passed());
    }
    assert!(build_degenerate_family(0.0).is_err());
    assert!(build_degenerate_family(2.0).is_err());
}
