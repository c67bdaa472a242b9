use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use cgo_kahler::exec::init_thread_pool;
use cgo_kahler::harness::{
    run_convergence, run_recovery_sweep, run_verification, write_atomic, write_convergence, write_report,
    ConvergenceOptions, ExperimentConfig, REPORT_SCHEMA,
};
use cgo_kahler::{CPoint, Error, Potential, Result, C64};

#[derive(Parser)]
#[command(name = "cgo-kahler", version, about = "CGO phases, oscillatory pairings and pointwise density recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suites (harmonicity, Hessian identity, determinant
    /// relations, stationary phase oracle).
    Verify {
        #[arg(long, default_value = "euclidean")]
        potential: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for `verify.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the density at every configured target.
    Recover {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `morse.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// h-refinement table at one target.
    Converge {
        /// Take density, domain and schedule from this file; otherwise the
        /// canonical radial-bump study is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `re,im` or `a+bi` per coordinate, separated by `;`.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value = "euclidean")]
        potential: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// `;`-separated coordinates, each `re,im` or a complex literal like `0.1-0.2i`.
fn parse_target(text: &str) -> Result<CPoint> {
    let mut coords = Vec::new();
    for item in text.split(';').map(str::trim) {
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("bad target coordinate `{item}`: {e}"));
        let z = match item.split_once(',') {
            Some((re, im)) => {
                C64::new(re.trim().parse().map_err(|e| bad(&e))?, im.trim().parse().map_err(|e| bad(&e))?)
            }
            None => item.parse::<C64>().map_err(|e| bad(&e))?,
        };
        coords.push(z);
    }
    CPoint::new(coords).map_err(|e| Error::Config(e.to_string()))
}

fn verify(potential: &str, dim: usize, seed: u64, out: Option<&Path>) -> Result<bool> {
    if dim == 0 {
        return Err(Error::Config("dim must be at least 1".into()));
    }
    let pot = Potential::from_config(potential, 1.0)?;
    let report = run_verification(&pot, dim, seed)?;
    for c in &report.checks {
        let status = if c.note.is_some() { "SKIP" } else if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<48} max {:.3e} tol {:.1e} ({} samples)", c.name, c.max_residual, c.tolerance, c.samples);
    }
    if let Some(dir) = out {
        let mut bytes = serde_json::to_vec_pretty(&json!({ "schema": REPORT_SCHEMA, "report": report }))?;
        bytes.push(b'\n');
        write_atomic(&dir.join("verify.json"), &bytes)?;
    }
    Ok(report.passed())
}

fn recover(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.morse.seed = s;
    }
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    let report = run_recovery_sweep(&cfg)?;
    info!("{} targets in {:.2?}", report.rows.len(), report.runtime);
    for r in report.rows.iter().filter(|r| r.failed()) {
        warn!("target {} failed: {}", r.index, r.flags.join("; "));
    }
    let (csv_path, json_path) = write_report(&report, &cfg, &dir)?;
    println!(
        "targets {} failures {} rms_error {:.3e} rms_relative {}",
        report.rows.len(),
        report.failures,
        report.rms_error,
        report.rms_relative.map_or("n/a".to_string(), |v| format!("{v:.3e}"))
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn converge(
    config: Option<&Path>,
    target: Option<&str>,
    dim: usize,
    potential: &str,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<()> {
    let target = target.map(parse_target).transpose()?;
    let (mut opts, default_dir) = match config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            (ConvergenceOptions::from_config(&cfg, target)?, cfg.output.dir.clone())
        }
        None => {
            let t = target.unwrap_or_else(|| CPoint::origin(dim));
            if t.dim() != dim {
                return Err(Error::Config(format!("target has {} coordinates, --dim is {dim}", t.dim())));
            }
            let pot = Potential::from_config(potential, 1.0)?;
            (ConvergenceOptions::canonical(dim, t, pot).map_err(|e| Error::Config(e.to_string()))?, PathBuf::from("out"))
        }
    };
    if let Some(s) = seed {
        opts.seed = s;
    }
    let report = run_convergence(&opts)?;
    println!("{:>8} {:>14} {:>14} {:>10} {:>10} {:>10}", "h", "Re I", "Im I", "nodes", "err_est", "error");
    for r in &report.rows {
        println!(
            "{:>8.4} {:>14.6e} {:>14.6e} {:>10} {:>10.2e} {:>10}",
            r.h,
            r.value.re,
            r.value.im,
            r.nodes,
            r.err_est,
            r.error.map_or("-".to_string(), |e| format!("{e:.2e}"))
        );
    }
    let (csv_path, json_path) = write_convergence(&report, &out.unwrap_or(default_dir))?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidPoint(_)
        | Error::DimensionMismatch { .. }
        | Error::Potential(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var("CGO_KAHLER_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                if !init_thread_pool(n) {
                    warn!("thread pool already initialised; CGO_KAHLER_THREADS ignored");
                }
            }
            _ => {
                eprintln!("error: CGO_KAHLER_THREADS must be a positive integer, got `{v}`");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { potential, dim, seed, out } => verify(&potential, dim, seed, out.as_deref()).map(|ok| {
            if !ok {
                eprintln!("error: invariant check failed");
            }
            ok
        }),
        Command::Recover { config, seed, out } => recover(&config, seed, out).map(|()| true),
        Command::Converge { config, target, dim, potential, seed, out } => {
            converge(config.as_deref(), target.as_deref(), dim, &potential, seed, out).map(|()| true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
