//! Command-line runner for the coupled-system experiments: loads a JSON
//! config, drives one scenario, and writes deterministic artifacts.

mod config;
mod report;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "nehari-lab", about = "Radial solver for coupled Hardy systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Dotted-path config override, e.g. `params.nu=0.25`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory; takes precedence over the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Caps the rayon pool when `NEHARI_LAB_THREADS` is set; otherwise the
/// default pool (one thread per core) stands.
fn cap_threads() -> Result<()> {
    let Ok(raw) = std::env::var("NEHARI_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("NEHARI_LAB_THREADS must be a positive integer, got {raw:?}"))?;
    anyhow::ensure!(n >= 1, "NEHARI_LAB_THREADS must be at least 1, got {n}");
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("installing the global thread pool")?;
    Ok(())
}

fn run(config: &PathBuf, overrides: &[String], out: Option<PathBuf>) -> Result<ExitCode> {
    cap_threads()?;
    let cfg = config::load(config, overrides, out)?;
    let outcome = scenarios::run(&cfg)?;

    let passed = outcome.checks.iter().filter(|c| c.passed).count();
    let total = outcome.checks.len();
    let ok = total > 0 && passed == total;
    let verdict = if ok { "PASS" } else { "FAIL" };

    report::write_artifacts(&cfg.output_dir, &cfg, &outcome, verdict)?;
    println!(
        "{verdict} {:?}: {} ({passed}/{total} checks)",
        cfg.scenario, outcome.detail
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        config,
        overrides,
        out,
    } = cli.command;
    match run(&config, &overrides, out) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
