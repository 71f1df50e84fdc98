use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kolmo::output::{ensure_dir, write_json};
use kolmo::{parse_config, run, CliError, Mode};

/// Obstacle problems for kinetic Kolmogorov-Fokker-Planck operators.
#[derive(Parser)]
#[command(name = "kolmo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the obstacle problem and write the solution and a report.
    Solve(Common),
    /// Solve and run the invariant suite; exits 4 if a check fails.
    Verify(Common),
    /// Refinement study against an exact solution.
    Convergence(Common),
    /// Compare the PDE value with the optimal-stopping oracle.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Seed overriding the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Add wall-clock timings to the report (breaks byte reproducibility).
    #[arg(long)]
    timings: bool,
}

fn report_error(out: &Path, e: &CliError) {
    let body = e.to_json();
    eprintln!("{}", serde_json::to_string_pretty(&body).unwrap_or_else(|_| e.to_string()));
    if ensure_dir(out).is_ok() {
        let _ = write_json(&out.join("error.json"), &body);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Solve(a) => (Mode::Solve, a),
        Command::Verify(a) => (Mode::Verify, a),
        Command::Convergence(a) => (Mode::Convergence, a),
        Command::Oracle(a) => (Mode::Oracle, a),
    };
    let result = parse_config(&args.config, Some(mode), args.seed)
        .map_err(CliError::Config)
        .and_then(|cfg| run(&cfg, &args.out, args.timings));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&args.out, &e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
