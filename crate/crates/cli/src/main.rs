//! `chemolab`: command-line workbench for the chemotaxis-consumption model.
//!
//! Exit codes: 0 success (or a completed run), 1 usage, configuration or
//! IO error, 2 blow-up detected, 3 step limit reached.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use chemolab_core::config::RunConfig;
use chemolab_core::output::{simulate, write_run};
use chemolab_core::solver::Outcome;
use chemolab_core::sweep::{run_sweep, SweepSpec};
use chemolab_core::verify::run_all;

#[derive(Parser)]
#[command(
    name = "chemolab",
    version,
    about = "Chemotaxis-consumption model workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a configuration's parameters and print the report.
    Regime {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate one configuration and write its run directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every member of a parameter sweep.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the acceptance checks.
    Verify,
}

fn outcome_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Completed => 0,
        Outcome::BlowupDetected => 2,
        Outcome::StepLimit => 3,
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("config {}", path.display()))
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Regime { config } => {
            let cfg = load_config(&config)?;
            print!("{}", cfg.regime()?.to_key_values());
            Ok(0)
        }
        Command::Simulate { config, out } => {
            let cfg = load_config(&config)?;
            let sim = simulate(&cfg)?;
            write_run(&out, &sim)?;
            let r = &sim.result;
            println!("outcome={}", r.outcome);
            println!("t_final={}", r.final_state.t);
            println!("accepted_steps={}", r.accepted_steps);
            println!("rejected_steps={}", r.rejected_steps);
            println!("out={}", out.display());
            Ok(outcome_code(r.outcome))
        }
        Command::Sweep { spec, out, jobs } => {
            let parsed =
                SweepSpec::load(&spec).with_context(|| format!("sweep spec {}", spec.display()))?;
            println!("runs={}", parsed.len());
            let records = run_sweep(&parsed, &out, jobs)?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            println!("failed={failed}");
            println!("index={}", out.join("index.csv").display());
            Ok(0)
        }
        Command::Verify => {
            let checks = run_all(|c| println!("{c}"));
            let failed: Vec<String> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} {}", c.id, c.name))
                .collect();
            if failed.is_empty() {
                println!("all {} checks passed", checks.len());
                Ok(0)
            } else {
                eprintln!("failed: {}", failed.join(", "));
                Ok(1)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
