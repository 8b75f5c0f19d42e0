//! Checks a measure against the metric axioms on a window: positive segment
//! mass and no hyperplane mass concentrated at a point.

use busemann::prelude::*;
use std::sync::Arc;

pub fn run_example() -> Result<()> {
    let window = BoxRegion::centered_cube(2, 1.0)?;
    let plan = SamplingPlan::new(window.clone(), 3).with_counts(50, 10, 10, 10);

    let clean = BaseMeasureND::lebesgue_box(BoxRegion::centered_cube(2, 10.0)?, 1.0)?;
    let nu = Arc::new(HyperplaneMeasure::position_direction(
        BaseMeasure::Spatial(clean),
        DirectionMeasure::Uniform,
    )?);
    println!("Lebesgue box: {}", validate(&nu, &window, &plan)?.verdict());

    let atoms = BaseMeasureND::atomic(vec![
        (Point::new(vec![0.25, 0.5])?, 1.0),
        (Point::new(vec![5.0, 5.0])?, 1.0),
        (Point::new(vec![-4.0, 3.0])?, 1.0),
    ])?;
    let nu = Arc::new(HyperplaneMeasure::position_direction(
        BaseMeasure::Spatial(atoms),
        DirectionMeasure::Uniform,
    )?);
    let r = validate(&nu, &window, &plan)?;
    println!("atom inside the window: {}", r.verdict());
    assert!(!r.passed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
