//! Monte Carlo estimates with standard errors, and how they shrink with budget.

use busemann::evaluators::{mc_estimate, McQuery};
use busemann::prelude::*;

pub fn run_example() -> Result<()> {
    let s = build_degenerate_family(0.3)?;
    let x = Point::new(vec![-0.5, 0.2])?;
    let y = Point::new(vec![0.6, 0.7])?;
    let exact = Evaluator::new(s.measure.clone(), Backend::Exact2D)?.seg_mass(&x, &y)?;
    println!("exact   {exact:.8}");
    let q = McQuery::SegMass { x, y };
    for budget in [1u64 << 14, 1 << 16, 1 << 18, 1 << 20] {
        let e = mc_estimate(&s.measure, &q, budget, 9)?;
        let z = (e.value() - exact) / e.std_error();
        println!("{budget:>8}: {:.8} ± {:.8}  z = {z:+.2}", e.value(), e.std_error());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
