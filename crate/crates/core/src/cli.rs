//! Command implementations behind the `busemann` binary: `run`, `eval` and
//! `calibrate`. Each returns the process exit code.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{run_diagnostics, Audit, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::evaluators::{calibrate_kmw_constant_unchecked, kmw_constant_analytic, Backend, KmwConstant};
use crate::geometry::{BoxRegion, Point};
use crate::measure::{validate, ValidationReport};
use crate::plan::SamplingPlan;
use crate::scenarios::{grid_export, Scenario, ScenarioSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_AUDIT: i32 = 2;

pub const JSON_BEGIN: &str = "--- BEGIN JSON ---";
pub const JSON_END: &str = "--- END JSON ---";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Overrides of the default plan; the plan seed is the config seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PlanSpec {
    pub region: Option<BoxRegion>,
    pub pair_count: Option<usize>,
    pub triple_count: Option<usize>,
    pub cycle_count: Option<usize>,
    pub cube_count: Option<usize>,
    pub scale_range: Option<(f64, f64)>,
}

fn default_report() -> String {
    "report.txt".into()
}

fn default_resolution() -> usize {
    17
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_report")]
    pub report: String,
    pub grid: Option<String>,
    #[serde(default = "default_resolution")]
    pub grid_resolution: usize,
    #[serde(default)]
    pub grid_format: Format,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            report: default_report(),
            grid: None,
            grid_resolution: default_resolution(),
            grid_format: Format::Json,
        }
    }
}

/// Assertions checked on top of the built-in audits.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Expectations {
    pub kappa_min: Option<f64>,
    pub kappa_max: Option<f64>,
    pub tau_min: Option<f64>,
    pub delta_min: Option<f64>,
    pub c_low_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub plan: PlanSpec,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub expect: Expectations,
    /// Calibration file from `calibrate`; the analytic constant must lie in
    /// its interval.
    pub calibration: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn plan_for(&self, s: &Scenario) -> Result<SamplingPlan> {
        let p = &self.plan;
        let mut plan = SamplingPlan::new(p.region.clone().unwrap_or_else(|| s.window.clone()), self.seed);
        if let Some(v) = p.pair_count {
            plan.pair_count = v;
        }
        if let Some(v) = p.triple_count {
            plan.triple_count = v;
        }
        if let Some(v) = p.cycle_count {
            plan.cycle_count = v;
        }
        if let Some(v) = p.cube_count {
            plan.cube_count = v;
        }
        if let Some(v) = p.scale_range {
            plan.scale_range = v;
        }
        plan.check()?;
        if plan.region.dim() != s.dim {
            return Err(Error::InvalidPlan("plan region dimension differs from the scenario".into()));
        }
        Ok(plan)
    }
}

/// Machine-readable part of a run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub scenario: String,
    pub dim: usize,
    pub seed: u64,
    pub backend: Backend,
    pub validation: ValidationReport,
    pub diagnostics: DiagnosticsReport,
    pub expectations: Vec<Audit>,
    pub passed: bool,
}

impl RunReport {
    pub fn to_text(&self) -> Result<String> {
        let d = &self.diagnostics;
        let mut t = String::new();
        let _ = writeln!(t, "scenario: {} (n = {})", self.scenario, self.dim);
        let _ = writeln!(t, "seed: {}", self.seed);
        let _ = writeln!(t, "backend: {}", self.backend.name());
        let _ = writeln!(t, "validation: {}", self.validation.verdict());
        let _ = writeln!(t, "pairs: {}", d.pairs);
        let _ = writeln!(t, "kappaHat: {}", d.kappa_hat.value);
        match &d.tau_hat {
            Some(tau) => {
                let _ = writeln!(t, "tauHat: {}", tau.tau_hat);
            }
            None => {
                let _ = writeln!(t, "tauHat: unavailable for this backend");
            }
        }
        let _ = writeln!(t, "deltaHat: {}", d.delta_hat.value);
        let _ = writeln!(t, "bilip: cLow = {}, cHigh = {}", d.bilip.c_low.value, d.bilip.c_high.value);
        let _ = writeln!(t, "cyclic worst: {}", d.cyclic.worst);
        let _ = writeln!(t, "cube worst: {} (bound {})", d.cube.worst, d.cube.bound);
        let _ = writeln!(t, "audits:");
        for a in d.audits.iter().chain(&self.expectations) {
            let _ = writeln!(
                t,
                "  {} {}: {} {} {}",
                if a.passed { "PASS" } else { "FAIL" },
                a.name,
                a.value,
                a.relation,
                a.bound
            );
            if !a.passed {
                if let Some(w) = &a.witness {
                    let _ = writeln!(t, "    witness: {}", serde_json::to_string(w)?);
                }
            }
        }
        let _ = writeln!(t, "result: {}", if self.passed { "pass" } else { "fail" });
        let _ = writeln!(t, "{JSON_BEGIN}");
        t.push_str(&serde_json::to_string_pretty(self)?);
        t.push('\n');
        let _ = writeln!(t, "{JSON_END}");
        Ok(t)
    }
}

/// The JSON block between the markers of a text report.
pub fn extract_json_block(report: &str) -> Option<&str> {
    let start = report.find(JSON_BEGIN)? + JSON_BEGIN.len();
    let end = report[start..].find(JSON_END)? + start;
    Some(report[start..end].trim())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn expectation_audits(e: &Expectations, d: &DiagnosticsReport) -> Vec<Audit> {
    let mut out = Vec::new();
    let k = &d.kappa_hat;
    if let Some(v) = e.kappa_min {
        out.push(Audit::at_least("expect.kappaMin", k.value, v, k.witness.clone()));
    }
    if let Some(v) = e.kappa_max {
        out.push(Audit::at_most("expect.kappaMax", k.value, v, k.witness.clone()));
    }
    if let Some(v) = e.tau_min {
        let tau = d.tau_hat.as_ref();
        out.push(Audit::at_least(
            "expect.tauMin",
            tau.map_or(f64::NAN, |t| t.tau_hat),
            v,
            tau.and_then(|t| t.witness.clone()),
        ));
    }
    if let Some(v) = e.delta_min {
        out.push(Audit::at_least("expect.deltaMin", d.delta_hat.value, v, d.delta_hat.witness.clone()));
    }
    if let Some(v) = e.c_low_min {
        let c = &d.bilip.c_low;
        out.push(Audit::at_least("expect.cLowMin", c.value, v, c.witness.clone()));
    }
    out
}

fn calibration_gate(path: &Path, n: usize) -> Result<Audit> {
    let c: KmwConstant = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if c.n != n {
        return Err(Error::Config(format!("calibration file is for n = {}, scenario has n = {n}", c.n)));
    }
    let v = kmw_constant_analytic(n);
    let mut a = Audit::at_most("calibration", (v - c.value).abs(), c.half_width(), None);
    a.passed = c.contains(v);
    Ok(a)
}

/// Builds the scenario, validates, runs every diagnostic and returns the report.
pub fn execute_run(cfg: &RunConfig) -> Result<(Scenario, RunReport)> {
    let s = cfg.scenario.build()?;
    let plan = cfg.plan_for(&s)?;
    let f = s.embedding()?;
    let validation = validate(&s.measure, &plan.region, &plan)?;
    let diagnostics = run_diagnostics(&f, &plan)?;
    let mut expectations = expectation_audits(&cfg.expect, &diagnostics);
    if let Some(p) = &cfg.calibration {
        expectations.push(calibration_gate(p, s.dim)?);
    }
    let passed = validation.passed() && diagnostics.passed() && expectations.iter().all(|a| a.passed);
    let report = RunReport {
        scenario: s.name.clone(),
        dim: s.dim,
        seed: cfg.seed,
        backend: f.backend(),
        validation,
        diagnostics,
        expectations,
        passed,
    };
    Ok((s, report))
}

fn out_path(out: Option<&Path>, name: &str) -> PathBuf {
    match out {
        Some(d) => d.join(name),
        None => PathBuf::from(name),
    }
}

fn run_inner(config: &Path, out: Option<&Path>) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let (s, report) = execute_run(&cfg)?;
    let path = out_path(out, &cfg.outputs.report);
    write_atomic(&path, report.to_text()?.as_bytes())?;
    println!("report: {}", path.display());
    if let Some(g) = &cfg.outputs.grid {
        let img = grid_export(&s, cfg.outputs.grid_resolution, &s.window)?;
        let body = match cfg.outputs.grid_format {
            Format::Csv => img.to_csv(),
            Format::Json => serde_json::to_string_pretty(&img)? + "\n",
        };
        let gp = out_path(out, g);
        write_atomic(&gp, body.as_bytes())?;
        println!("grid: {}", gp.display());
    }
    for a in report.diagnostics.failed().into_iter().chain(report.expectations.iter().filter(|a| !a.passed)) {
        eprintln!("audit failed: {} = {} (required {} {})", a.name, a.value, a.relation, a.bound);
    }
    Ok(report.passed)
}

/// `run <config>`: exit 0 when every audit passes, 2 on an audit failure
/// (report still written), 1 on config or build errors.
pub fn cmd_run(config: &Path, out: Option<&Path>) -> i32 {
    match run_inner(config, out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_AUDIT,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairLine {
    pub d: f64,
    pub transversal: f64,
    pub delta_f: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub backend: &'static str,
    /// `[d, transversal, delta_f..]` standard errors for Monte Carlo.
    pub std_errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PointLine {
    pub f: Vec<f64>,
    pub x: Vec<f64>,
    pub backend: &'static str,
}

/// Parses `"x1,x2,..."`.
pub fn parse_point(s: &str) -> Result<Point> {
    let c = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate {t:?} in {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Point::new(c)
}

/// `d_ν` and `f_ν` at the given pairs and points, one record per line.
pub fn eval_lines(cfg: &RunConfig, pairs: &[(Point, Point)], points: &[Point], format: Format) -> Result<Vec<String>> {
    let s = cfg.scenario.build()?;
    let f = s.embedding()?;
    let backend = f.backend().name();
    let mut out = Vec::new();
    if !pairs.is_empty() {
        if format == Format::Csv {
            out.push("x,y,d,transversal,deltaF".into());
        }
        for (x, y) in pairs {
            let q = f.evaluator().pair(x, y, &[])?;
            let line = PairLine {
                d: q.seg_mass,
                transversal: q.transversal,
                delta_f: q.delta_f,
                x: x.coords().to_vec(),
                y: y.coords().to_vec(),
                backend,
                std_errors: q.std_errors,
            };
            out.push(match format {
                Format::Json => serde_json::to_string(&line)?,
                Format::Csv => format!(
                    "\"{}\",\"{}\",{},{},\"{}\"",
                    join(&line.x),
                    join(&line.y),
                    line.d,
                    line.transversal,
                    join(&line.delta_f)
                ),
            });
        }
    }
    if !points.is_empty() {
        if format == Format::Csv {
            out.push("x,f".into());
        }
        for x in points {
            let line = PointLine {
                f: f.eval(x)?.as_slice().to_vec(),
                x: x.coords().to_vec(),
                backend,
            };
            out.push(match format {
                Format::Json => serde_json::to_string(&line)?,
                Format::Csv => format!("\"{}\",\"{}\"", join(&line.x), join(&line.f)),
            });
        }
    }
    Ok(out)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// `eval <config> --pair x y | --point x`.
pub fn cmd_eval(config: &Path, pairs: &[(String, String)], points: &[String], format: Format) -> i32 {
    let run = || -> Result<Vec<String>> {
        let cfg = RunConfig::load(config)?;
        let pairs = pairs
            .iter()
            .map(|(a, b)| Ok((parse_point(a)?, parse_point(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let points = points.iter().map(|p| parse_point(p)).collect::<Result<Vec<_>>>()?;
        eval_lines(&cfg, &pairs, &points, format)
    };
    match run() {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn calibration_file_name(n: usize) -> String {
    format!("kmw_constant_n{n}.json")
}

/// `calibrate --dim n --budget B --seed S`: writes the fitted constant; exit 2
/// when the fits at different `|x|` disagree.
pub fn cmd_calibrate(n: usize, budget: u64, seed: u64, out: Option<&Path>) -> i32 {
    let run = || -> Result<KmwConstant> {
        let c = calibrate_kmw_constant_unchecked(n, budget, seed)?;
        let path = out_path(out, &calibration_file_name(n));
        write_atomic(&path, (serde_json::to_string_pretty(&c)? + "\n").as_bytes())?;
        println!("calibration: {}", path.display());
        println!("C({n}) = {} ± {} (4 SE)", c.value, 4.0 * c.std_error);
        if let Some(w) = &c.warning {
            eprintln!("warning: {w}");
        }
        Ok(c)
    };
    match run() {
        Ok(c) if c.independence_check == Some(false) => {
            eprintln!("error: fitted constants disagree across |x|");
            EXIT_AUDIT
        }
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let text = r#"{"seed": 1, "scenario": {"builder": "crofton", "dim": 2}, "plan": {"tauGird": 0.01}}"#;
        let e = serde_json::from_str::<RunConfig>(text).unwrap_err().to_string();
        assert!(e.contains("tauGird"), "{e}");
    }

    #[test]
    fn seed_is_mandatory() {
        let text = r#"{"scenario": {"builder": "crofton", "dim": 2}}"#;
        let e = serde_json::from_str::<RunConfig>(text).unwrap_err().to_string();
        assert!(e.contains("seed"), "{e}");
    }

    #[test]
    fn eval_crofton_pair_and_basepoint() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 1, "scenario": {"builder": "crofton", "dim": 2}}"#).unwrap();
        let x = parse_point("0,0").unwrap();
        let y = parse_point("1,0").unwrap();
        let lines = eval_lines(&cfg, &[(x.clone(), y), (x.clone(), x.clone())], &[x], Format::Json).unwrap();
        assert!(lines[0].starts_with(r#"{"d":0.6366197723675814"#), "{}", lines[0]);
        assert!(lines[1].starts_with(r#"{"d":0.0"#), "{}", lines[1]);
        assert!(lines[2].starts_with(r#"{"f":[0.0,0.0]"#), "{}", lines[2]);
    }

    #[test]
    fn json_block_round_trip() {
        let r = "head\n--- BEGIN JSON ---\n{\"a\": 1}\n--- END JSON ---\n";
        assert_eq!(extract_json_block(r), Some("{\"a\": 1}"));
    }
}
