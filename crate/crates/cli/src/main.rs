//! Scenario runner for dephasing-model simulations: builds models from TOML
//! scenarios, executes the requested checks, and persists machine-readable
//! reports. Exit status: 0 when every requested check passed, 1 when some
//! check failed its tolerance, 2 on usage or input errors.

mod report;
mod run;
mod scenario;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::run::{run_scenario, Overrides};
use crate::scenario::{CheckFamily, Scenario};

#[derive(Parser)]
#[command(name = "dephase", version, about = "dephasing-model scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for result files and the manifest
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override check tolerances
    #[arg(long)]
    tol: Option<f64>,
    /// Override the regression evaluation budget
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in the scenario
    Simulate(RunArgs),
    /// Run only the divisibility-family checks (divisibility, semigroup,
    /// blp, coherence)
    Divisibility(RunArgs),
    /// Run only the regression-family checks
    Regression(RunArgs),
    /// Run only the spin-boson checks (trajectory, cutoff)
    Spinboson(RunArgs),
    /// Run only the principal-value integral suite
    Pvint(RunArgs),
    /// Render a summary of a completed run directory
    Report {
        /// Run directory containing manifest.json
        run_dir: PathBuf,
    },
}

fn execute(args: &RunArgs, family: CheckFamily) -> Result<bool> {
    let text = fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading scenario {}", args.scenario.display()))?;
    let scenario = Scenario::from_toml(&text)?;
    let overrides = Overrides { seed: args.seed, tol: args.tol, budget: args.budget };
    let outcome = run_scenario(&scenario, &args.out, &overrides, family)?;
    for check in &outcome.manifest.checks {
        println!(
            "{:<28} {:<5} {}",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.summary
        );
    }
    println!(
        "{}: {} checks, manifest at {}",
        outcome.manifest.name,
        outcome.manifest.checks.len(),
        args.out.join("manifest.json").display()
    );
    Ok(outcome.all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => execute(args, CheckFamily::All),
        Command::Divisibility(args) => execute(args, CheckFamily::Divisibility),
        Command::Regression(args) => execute(args, CheckFamily::Regression),
        Command::Spinboson(args) => execute(args, CheckFamily::Spinboson),
        Command::Pvint(args) => execute(args, CheckFamily::Pv),
        Command::Report { run_dir } => report::render(run_dir).map(|text| {
            print!("{text}");
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
