use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levysync::experiment::{run_experiment, ExperimentConfig, Mode, RunOptions};
use levysync::Error;

/// Simulate and analyse N-component synchronization systems.
#[derive(Parser)]
#[command(name = "levysync", version)]
struct Cli {
    #[command(subcommand)]
    mode: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo samples of a pair difference and their empirical CF
    Simulate(Flags),
    /// Theoretical CF tables over the lambda grid
    Analytic(Flags),
    /// Simulation against theory, with distances, KS and fits
    Compare(Flags),
    /// Inter-event law report and kappa_N table
    DistInfo(Flags),
    /// Remainder and finite-horizon convergence tables
    Convergence(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed, overriding the config
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, flags) = match cli.mode {
        Cmd::Simulate(f) => (Mode::Simulate, f),
        Cmd::Analytic(f) => (Mode::Analytic, f),
        Cmd::Compare(f) => (Mode::Compare, f),
        Cmd::DistInfo(f) => (Mode::DistInfo, f),
        Cmd::Convergence(f) => (Mode::Convergence, f),
    };
    let cfg = match ExperimentConfig::load(&flags.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions { mode: Some(mode), out: flags.out, seed: flags.seed, threads: flags.threads };
    match run_experiment(&cfg, &opts) {
        Ok(report) => {
            if !flags.quiet {
                for l in &report.lines {
                    println!("{l}");
                }
                for f in &report.files {
                    println!("wrote {}", f.display());
                }
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
