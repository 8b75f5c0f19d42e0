//! Full audit of a pushforward measure with a witness for every failure.

use busemann::prelude::*;

pub fn run_example() -> Result<()> {
    let mu = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 100.0)?, 1.0)?;
    let s = build_kmw(mu, BoxRegion::centered_cube(2, 1.0)?)?;
    let f = s.embedding()?;
    let plan = s.plan(2024).with_counts(200, 100, 200, 50);
    let r = run_diagnostics(&f, &plan)?;
    println!("κ̂ = {:.6}", r.kappa_hat.value);
    if let Some(t) = &r.tau_hat {
        println!("τ̂ = {:.2}", t.tau_hat);
    }
    println!("δ̂ = {:.6}", r.delta_hat.value);
    println!("cLow = {:.6}, cHigh = {:.6}", r.bilip.c_low.value, r.bilip.c_high.value);
    let filled = r.eta_euclidean.buckets.iter().filter(|b| b.count > 0).count();
    println!("η buckets filled: {filled}");
    for a in &r.audits {
        println!("{} {}: {:.3e} {} {:.3e}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.value, a.relation, a.bound);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
