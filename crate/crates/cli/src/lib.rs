//! Command-line front end: configuration, subcommands and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{RunConfig, OUT_DIR_ENV};
use crate::error::{exit, CliError, CliResult};
use crate::output::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "foldwave", version, about = "Slow-fast analysis of a traveling-wave excited beam on a nonlinear foundation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value` or `--key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--key value")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the forced oscillator and classify bursts.
    Simulate(Common),
    /// Critical manifold, potential wells and fold brackets over d.
    Manifold(Common),
    /// Fold curves in a parameter plane with cusp and Bogdanov-Takens points.
    FoldCurve(Common),
    /// Cusp points of the fold curves in a parameter plane.
    CuspScan(Common),
    /// Quadrature check of the reduced coefficients.
    Coeffs(Common),
    /// Run the verification suite.
    Verify(Common),
}

fn load(common: &Common) -> CliResult<RunConfig> {
    RunConfig::load(common.config.as_deref(), std::env::var(OUT_DIR_ENV).ok(), &common.overrides)
}

fn verify(cfg: &RunConfig) -> CliResult<String> {
    cfg.validate()?;
    let checks = verify::run_suite(cfg, None);
    let report = verify::render(&checks);
    print!("{report}");
    write_atomic(&cfg.out_dir.join("verify_report.txt"), report.as_bytes())?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(String::new())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}

fn dispatch(command: &Command) -> CliResult<String> {
    match command {
        Command::Simulate(c) => commands::simulate(&load(c)?),
        Command::Manifold(c) => commands::manifold(&load(c)?),
        Command::FoldCurve(c) => commands::fold_curve(&load(c)?),
        Command::CuspScan(c) => commands::cusp_scan(&load(c)?),
        Command::Coeffs(c) => commands::coeffs(&load(c)?),
        Command::Verify(c) => verify(&load(c)?),
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(summary) => {
            if !summary.is_empty() {
                println!("{summary}");
            }
            exit::OK
        }
        Err(e) => {
            eprintln!("foldwave: {e}");
            e.exit_code()
        }
    }
}
