//! Lines through points of `μ` on the real axis with near-vertical normals:
//! on the axis `f(t) - f(s) = μ([s, t]) e₁`.

use std::f64::consts::FRAC_PI_6;

use busemann::prelude::*;

pub fn run_example() -> Result<()> {
    let window = BoxRegion::new(vec![-2.0, -1.0], vec![2.0, 1.0])?;
    let cases = [
        ("lebesgue", BaseMeasure1D::lebesgue(1.0)?),
        ("|x|^-1/2", BaseMeasure1D::power_density(-0.5, -4.0, 4.0, 256)?),
    ];
    for (name, mu) in cases {
        let s = build_beurling_ahlfors(mu.clone(), FRAC_PI_6, window.clone())?;
        let f = s.embedding()?;
        println!("{name}");
        for (a, b) in [(-1.5, -0.2), (-0.3, 0.9), (0.25, 1.75)] {
            let df = f.difference(&Point::new(vec![b, 0.0])?, &Point::new(vec![a, 0.0])?)?;
            println!(
                "  [{a:+.2}, {b:+.2}]  e1: {:.12}  μ: {:.12}  e2: {:+.1e}",
                df[0],
                mu.cdf(a, b)?,
                df[1]
            );
        }
        let plan = s.plan(5).with_counts(200, 50, 100, 50);
        let r = run_diagnostics(&f, &plan)?;
        println!("  δ̂ = {:.6}  κ̂ = {:.6}  audits {}", r.delta_hat.value, r.kappa_hat.value, r.passed());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
