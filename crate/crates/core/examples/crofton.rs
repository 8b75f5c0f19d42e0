//! Crofton measure in the plane: `d_ν = (2/π)|x - y|` and `f_ν(x) = (x - o)/2`.

use std::f64::consts::PI;

use busemann::prelude::*;

pub fn run_example() -> Result<()> {
    let s = build_crofton(2)?;
    let f = s.embedding()?;
    let eval = f.evaluator();
    let x = Point::new(vec![0.2, 0.7])?;
    let y = Point::new(vec![0.9, 0.1])?;
    let d = eval.seg_mass(&x, &y)?;
    println!("backend      {}", eval.backend().name());
    println!("d(x, y)      {d:.15}");
    println!("(2/π)|x - y| {:.15}", 2.0 / PI * x.distance(&y));
    let fx = f.eval(&x)?;
    println!("f(x)         ({:.15}, {:.15})", fx[0], fx[1]);
    assert!((d - 2.0 / PI * x.distance(&y)).abs() < 1e-12);

    let mc = Evaluator::new(s.measure.clone(), Backend::MonteCarlo { budget: 1 << 20, seed: 1 })?;
    let q = mc.pair(&x, &y, &[])?;
    let se = q.std_errors.as_ref().map_or(0.0, |e| e[0]);
    println!("MC d(x, y)   {:.6} ± {:.6}", q.seg_mass, se);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
