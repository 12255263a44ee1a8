//! `cvcka-scan`: evaluate multi-user CV-QKD key rates on channel grids
//! and find maximum-tolerable-noise thresholds by bisection.
//!
//! Exit codes: 0 success, 1 configuration/IO error, 2 numerical failure.

// Validation guards are written as negated comparisons on purpose:
// `!(x > 0.0)` also rejects NaN, which `x <= 0.0` lets through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod scan;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, ScanConfig};
use scan::{rate_csv, run_grid, run_point, run_threshold_scan, threshold_csv};

#[derive(Parser)]
#[command(
    name = "cvcka-scan",
    about = "Key-rate scans for multi-user CV-QKD protocols",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the TOML scan configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path (overrides [output].path; "-" for stdout).
    #[arg(long, global = true)]
    out: Option<String>,

    /// RNG seed (overrides [output].seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured rate at a single (t, eps) point.
    Point,
    /// Emit a dense (t, eps, rate) table.
    Grid,
    /// Bisect the maximum tolerable excess noise over the t grid.
    Threshold,
}

fn load_config(cli: &Cli) -> Result<ScanConfig, String> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| "missing required --config <path>".to_string())?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_path = Some(out.clone());
    }
    let wanted = match cli.command {
        Command::Point => "point",
        Command::Grid => "grid",
        Command::Threshold => "threshold",
    };
    if cfg.mode.name() != wanted {
        return Err(format!(
            "config declares a [{}] mode but the `{wanted}` subcommand was invoked",
            cfg.mode.name()
        ));
    }
    Ok(cfg)
}

fn write_output(cfg: &ScanConfig, csv: &str) -> Result<(), String> {
    match cfg.output_path.as_deref() {
        None | Some("-") => {
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| format!("cannot write to stdout: {e}"))?;
        }
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| format!("cannot write {path}: {e}"))?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), (u8, String)> {
    let cfg = load_config(cli).map_err(|e| (1u8, e))?;
    let csv = match cli.command {
        Command::Point => {
            let row = run_point(&cfg).map_err(|e| (2u8, e.to_string()))?;
            rate_csv(&[row])
        }
        Command::Grid => {
            let rows = run_grid(&cfg).map_err(|e| (2u8, e.to_string()))?;
            rate_csv(&rows)
        }
        Command::Threshold => {
            let pts = run_threshold_scan(&cfg).map_err(|e| (2u8, e.to_string()))?;
            threshold_csv(&pts)
        }
    };
    write_output(&cfg, &csv).map_err(|e| (1u8, e))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cvcka-scan: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("cvcka-scan: {msg}");
            ExitCode::from(code)
        }
    }
}
