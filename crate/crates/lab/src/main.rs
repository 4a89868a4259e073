use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use excess_risk_core::bounds::{RateCurve, RateKind};
use excess_risk_core::surrogate::{CalibrationTable, DEFAULT_PSI_GRID};
use excess_risk_lab::checks::{run_dist_check, write_dist_check};
use excess_risk_lab::config::{load_toml, DistCheckConfig, ExperimentConfig};
use excess_risk_lab::fit::{compare_to_theory, fit_rate, DEFAULT_SLACK};
use excess_risk_lab::io::{read_risk_rows, write_calibration, write_curves};
use excess_risk_lab::sweep::run_sweep;
use serde_json::json;

/// Exit code for a completed run whose verdict is negative.
const VERDICT_FAIL: u8 = 2;

#[derive(Parser)]
#[command(name = "erlab", version, about = "Excess-risk experiments for ReLU network classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate every (n, seed) cell of an experiment config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit the decay exponent of a risk table and compare it with theory.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Divide out the (log n)^{(1+α)/(2+α)} factor before fitting.
        #[arg(long)]
        log_correction: bool,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: f64,
        /// Constant of the lower and upper curves used for the ratio trajectories.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
    },
    /// Print the theoretical rate curves as CSV.
    Curves {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n_min: f64,
        #[arg(long)]
        n_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
    },
    /// Print H, H⁻ and ψ of the logistic loss on an η grid as CSV.
    CalibTable {
        #[arg(long, default_value_t = DEFAULT_PSI_GRID)]
        points: usize,
    },
    /// Run the distribution property suite.
    DistCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Prints one line to stdout; a closed pipe is not an error.
fn emit(text: &str) -> std::io::Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Sweep { config } => {
            let cfg: ExperimentConfig = load_toml(&config)?;
            let summary = run_sweep(&cfg).context("sweep failed")?;
            emit(
                &json!({
                    "output": summary.path,
                    "rows": summary.rows.len(),
                    "computed": summary.computed,
                    "skipped": summary.skipped,
                    "failed": summary.failed,
                })
                .to_string(),
            )?;
            Ok(true)
        }
        Command::Fit {
            input,
            alpha,
            log_correction,
            slack,
            constant,
        } => {
            let rows = read_risk_rows(&input)?;
            let fit = fit_rate(&rows, log_correction, alpha)?;
            let lower = RateCurve {
                alpha,
                constant,
                kind: RateKind::Lower,
            };
            let upper = RateCurve {
                kind: RateKind::Upper,
                ..lower
            };
            let verdict = compare_to_theory(&fit, &lower, &upper, slack);
            emit(&serde_json::to_string_pretty(&json!({ "fit": fit, "verdict": verdict }))?)?;
            Ok(verdict.pass)
        }
        Command::Curves {
            alpha,
            n_min,
            n_max,
            points,
            constant,
        } => {
            let curves = [RateKind::Lower, RateKind::Upper, RateKind::PhiUpper].map(|kind| RateCurve { alpha, constant, kind });
            write_curves(std::io::stdout().lock(), &curves, n_min, n_max, points)?;
            Ok(true)
        }
        Command::CalibTable { points } => {
            anyhow::ensure!(points >= 3, "need at least 3 grid points");
            write_calibration(std::io::stdout().lock(), &CalibrationTable::new(points))?;
            Ok(true)
        }
        Command::DistCheck { config } => {
            let cfg: DistCheckConfig = load_toml(&config)?;
            let report = run_dist_check(&cfg)?;
            if let Some(dir) = &cfg.output_dir {
                write_dist_check(dir, &cfg, &report)?;
            }
            emit(&serde_json::to_string_pretty(&report)?)?;
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(VERDICT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
