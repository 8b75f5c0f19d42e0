//! Runs a scenario from a JSON config, as `busemann run` does, and prints the
//! text report header.

use busemann::cli::{execute_run, RunConfig};
use busemann::prelude::*;

const CONFIG: &str = r#"{
  "seed": 7,
  "scenario": { "builder": "degenerate", "theta0": 0.1 },
  "plan": { "pairCount": 200, "tripleCount": 50, "cycleCount": 100, "cubeCount": 50 },
  "expect": { "kappaMin": 0.7 }
}"#;

pub fn run_example() -> Result<()> {
    let cfg: RunConfig = serde_json::from_str(CONFIG)?;
    let (_, report) = execute_run(&cfg)?;
    let text = report.to_text()?;
    for line in text.lines().take_while(|l| !l.starts_with("---")) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
