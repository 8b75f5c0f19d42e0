//! Two caps of normals around `e₁` and `e₂`: shrinking the caps lowers `κ̂`
//! and the lower bi-Lipschitz constant.

use std::f64::consts::FRAC_PI_2;

use busemann::prelude::*;

pub fn run_example() -> Result<()> {
    println!("{:>8} {:>10} {:>10} {:>10}", "θ₀", "κ̂", "cLow", "cHigh");
    for theta0 in [FRAC_PI_2, 0.4, 0.2, 0.1, 0.05] {
        let s = build_degenerate_family(theta0)?;
        let f = s.embedding()?;
        let plan = s.plan(11).with_counts(300, 50, 100, 50);
        let r = run_diagnostics(&f, &plan)?;
        println!(
            "{theta0:>8.4} {:>10.6} {:>10.6} {:>10.6}",
            r.kappa_hat.value, r.bilip.c_low.value, r.bilip.c_high.value
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
