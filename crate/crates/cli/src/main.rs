use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gck::{load_scenario, run_command, Command, Overrides};

/// Check frame-relative connection identities for a scenario file.
#[derive(Debug, Parser)]
#[command(name = "gck", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    scenario: PathBuf,
    /// Replaces every check's own threshold.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if cli.tolerance.is_some_and(|t| !(t > 0.0)) || cli.samples == Some(0) {
        eprintln!("error: --tolerance and --samples must be positive");
        return ExitCode::from(2);
    }
    let overrides = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        tolerance: cli.tolerance,
    };
    let scenario = match load_scenario(&cli.scenario, &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_command(cli.command, &scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = report.render();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
