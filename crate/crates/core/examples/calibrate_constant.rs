//! Monte Carlo estimate of the pushforward constant `C(2)` next to `1/π`.

use std::f64::consts::PI;

use busemann::evaluators::calibrate_kmw_constant;
use busemann::prelude::*;

pub fn run_example() -> Result<()> {
    let c = calibrate_kmw_constant(2, 600_000, 42)?;
    for g in &c.grid {
        println!("|x| = {:>4}: {:.6} ± {:.6}", g.radius, g.value, g.std_error);
    }
    println!("C(2) = {:.6}, CI [{:.6}, {:.6}]", c.value, c.ci.0, c.ci.1);
    println!("1/π  = {:.6} inside: {}", 1.0 / PI, c.contains(1.0 / PI));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
