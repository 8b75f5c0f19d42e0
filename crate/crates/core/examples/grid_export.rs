//! Image of a lattice under `f_ν`, written as CSV for external plotting.

use std::f64::consts::FRAC_PI_6;

use busemann::prelude::*;
use busemann::scenarios::GridImage;

pub fn run_example() -> Result<()> {
    let window = BoxRegion::new(vec![-2.0, -1.0], vec![2.0, 1.0])?;
    let mu = BaseMeasure1D::power_density(-0.5, -4.0, 4.0, 256)?;
    let s = build_beurling_ahlfors(mu, FRAC_PI_6, window.clone())?;
    let img = grid_export(&s, 9, &window)?;
    let csv = img.to_csv();
    let path = std::env::temp_dir().join("busemann_ba_grid.csv");
    std::fs::write(&path, &csv)?;
    println!("{} nodes written to {}", img.nodes.len(), path.display());
    for line in csv.lines().take(6) {
        println!("{line}");
    }
    let back = GridImage::from_csv(&csv)?;
    assert_eq!(back.nodes.len(), img.nodes.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
