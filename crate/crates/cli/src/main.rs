use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use derivzeros::experiment::{parse_config, run_experiment, ExperimentConfig, RunOptions};
use derivzeros::Error;

/// Experiments on the zeros of high derivatives of random polynomials.
#[derive(Parser)]
#[command(name = "derivzeros", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Parent directory for the run directory (overrides output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        workers: Option<usize>,
        /// Master seed (overrides master_seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config file and report every problem in it.
    Validate { config: PathBuf },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!(
                    "{}: ok ({}, config_hash {})",
                    config.display(),
                    cfg.experiment.name(),
                    cfg.hash()
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run {
            config,
            out,
            workers,
            seed,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if workers == Some(0) {
                eprintln!("--workers must be positive");
                return ExitCode::from(EXIT_CONFIG);
            }
            let opts = RunOptions {
                out_dir: out,
                workers,
                seed,
            };
            match run_experiment(&cfg, &opts) {
                Ok(run) => {
                    let failed = run.failed_cells();
                    let total = run.report.records.len();
                    println!("{}", run.dir.display());
                    if failed > 0 {
                        eprintln!("{failed} of {total} cells failed; see results.json");
                        ExitCode::from(EXIT_PARTIAL)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e @ Error::Config(_)) => {
                    eprintln!("{e}");
                    ExitCode::from(EXIT_CONFIG)
                }
                Err(e) => {
                    eprintln!("run failed: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
