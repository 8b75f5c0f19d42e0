//! Pushforward of `μ × ω` with uniform normals: closed form over atoms against
//! planar integration and Monte Carlo.

use busemann::prelude::*;
use std::sync::Arc;

pub fn run_example() -> Result<()> {
    let atoms = vec![
        (Point::new(vec![3.0, 0.5])?, 1.0),
        (Point::new(vec![-2.0, 4.0])?, 0.5),
        (Point::new(vec![-1.5, -3.0])?, 2.0),
    ];
    let mu = BaseMeasureND::atomic(atoms)?;
    let s = build_kmw(mu, BoxRegion::centered_cube(2, 1.0)?)?;
    let x = Point::new(vec![0.4, -0.3])?;
    let y = Point::new(vec![-0.6, 0.8])?;
    for backend in [
        Backend::ClosedForm,
        Backend::Exact2D,
        Backend::MonteCarlo { budget: 1 << 20, seed: 3 },
    ] {
        let f = EmbeddingMap::new(Arc::clone(&s.measure), s.basepoint.clone(), backend)?;
        let q = f.evaluator().pair(&x, &y, &[])?;
        println!(
            "{:<11} d = {:.10}  f(x) - f(y) = ({:+.10}, {:+.10})",
            backend.name(),
            q.seg_mass,
            q.delta_f[0],
            q.delta_f[1]
        );
    }

    let box_mu = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 100.0)?, 1.0)?;
    let s = build_kmw(box_mu, BoxRegion::centered_cube(2, 1.0)?)?;
    println!("Lebesgue box doubling ratio {:?}", s.expected.doubling_ratio);
    let f = s.embedding()?;
    let fx = f.eval(&x)?;
    println!("{} f(x) = ({:.6}, {:.6})", f.backend().name(), fx[0], fx[1]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
