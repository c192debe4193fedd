//! Batch command-line front end for QUBO-based tracking.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qubotrack_core::Error;

const EXIT_CODES_HELP: &str = "EXIT CODES:
  0  success
  2  parameter or dimension error (also used by argument parsing)
  3  file could not be read, written, or parsed
  4  solver failure: no feasible sample was found

The default output directory is taken from QUBOTRACK_OUT_DIR when set.
Every command writes a config.json echo of its fully resolved configuration
into the output directory; re-running with the same flags reproduces all
CSV/JSON outputs byte for byte.";

#[derive(Parser)]
#[command(
    name = "qubotrack",
    version,
    about = "Tracking-by-detection as a QUBO: synthesize scenarios, build and solve the binary problems, sweep penalty weights, and reconstruct tracks",
    after_help = EXIT_CODES_HELP
)]
struct Cli {
    /// Output directory for all artifacts (default: $QUBOTRACK_OUT_DIR or .)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Cap the worker threads used for reads and segment solves.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic tracking scenario file.
    Synth(commands::SynthArgs),
    /// Build the (optionally penalized) QUBO or Ising file for an instance.
    Build(commands::BuildArgs),
    /// Sample a QUBO/Ising file and decode tracks.
    Solve(commands::SolveArgs),
    /// Sweep solution probability over the penalty weight.
    Sweep(commands::SweepArgs),
    /// Run the full segment/solve/stitch pipeline.
    Track(commands::TrackArgs),
}

fn exit_code_of(error: &Error) -> u8 {
    match error {
        Error::Parameter(_) | Error::Dimension(_) | Error::Size(_) => 2,
        Error::Io { .. } | Error::Format(_) => 3,
        Error::Infeasible(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore the error when a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os("QUBOTRACK_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let result = match cli.command {
        Command::Synth(args) => commands::run_synth(&out_dir, args),
        Command::Build(args) => commands::run_build(&out_dir, args),
        Command::Solve(args) => commands::run_solve(&out_dir, args),
        Command::Sweep(args) => commands::run_sweep(&out_dir, args),
        Command::Track(args) => commands::run_track(&out_dir, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}
