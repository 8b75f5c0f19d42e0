use std::path::PathBuf;
use std::process::ExitCode;

use busemann::cli::{cmd_calibrate, cmd_eval, cmd_run, Format};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "busemann", version, about = "Hyperplane-measure metrics, embeddings and audits")]
struct Args {
    /// Output directory for reports, grids and calibration files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the scenario, validate it and run every diagnostic.
    Run { config: PathBuf },
    /// Print d_ν for pairs and f_ν for points.
    Eval {
        config: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        pair: Vec<String>,
        #[arg(long)]
        point: Vec<String>,
    },
    /// Fit the pushforward constant C(n) by Monte Carlo.
    Calibrate {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = parse_count)]
        budget: u64,
        #[arg(long)]
        seed: u64,
    },
}

/// Accepts `10000000` as well as `1e7`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("not a sample count: {s}")),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out = args.out.as_deref();
    let code = match args.cmd {
        Cmd::Run { config } => cmd_run(&config, out),
        Cmd::Eval { config, pair, point } => {
            let pairs: Vec<(String, String)> = pair.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
            cmd_eval(&config, &pairs, &point, args.format)
        }
        Cmd::Calibrate { dim, budget, seed } => cmd_calibrate(dim, budget, seed, out),
    };
    ExitCode::from(code as u8)
}
