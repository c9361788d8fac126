//! Command-line laboratory for the Brownian directed polymer in a mollified
//! Gaussian environment.
//!
//! Exit codes: 0 success; 1 check failure; 2 invalid configuration or
//! config-hash mismatch; 3 I/O failure.

mod analyze;
mod bundle;
mod scan;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polymerlab_core::config::ExperimentConfig;
use polymerlab_core::error::Error;

#[derive(Parser)]
#[command(
    name = "polymerlab",
    version,
    about = "Simulation laboratory for the Brownian directed polymer"
)]
struct Cli {
    /// Experiment configuration (TOML). Defaults to the built-in desk
    /// configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (result-invariant).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory (overrides POLYMERLAB_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Proceed when records were produced under a different config hash.
    #[arg(long, global = true)]
    allow_hash_mismatch: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact-invariant suite.
    Verify {
        /// Documented test hook; "tilt-sign" flips the Ito correction so
        /// the suite's sensitivity can be demonstrated.
        #[arg(long)]
        inject_fault: Option<String>,
    },
    /// Run the configured ensembles and persist records and summaries.
    Simulate,
    /// Sweep beta or horizon values; one bundle per point.
    Scan {
        /// Comma-separated beta values (overrides the config sweep).
        #[arg(long, value_delimiter = ',')]
        betas: Vec<f64>,
        /// Comma-separated horizon values (overrides the config sweep).
        #[arg(long, value_delimiter = ',')]
        ts: Vec<f64>,
    },
    /// Run estimators and hypothesis tests over persisted records.
    Analyze {
        /// Records files (defaults to the bundle in the output directory).
        records: Vec<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Usage(_) => 2,
        Error::Numerical { .. } => 1,
        Error::Io(_) => 3,
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::desk_default(),
    };
    if let Some(seed) = cli.seed {
        cfg.ensemble.master_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("POLYMERLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.dir.clone())
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    let mut cfg = load_config(&cli)?;

    match &cli.command {
        Command::Verify { inject_fault } => {
            if let Some(mode) = inject_fault {
                cfg.inject_fault = Some(mode.clone());
                cfg.validate()?;
            }
            let outcomes = verify::run_verify(&cfg)?;
            let failed: Vec<&str> = outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| o.name)
                .collect();
            if failed.is_empty() {
                println!("verify: all {} checks pass", outcomes.len());
                Ok(true)
            } else {
                println!("verify: FAILED checks: {}", failed.join(", "));
                Ok(false)
            }
        }
        Command::Simulate => {
            let dir = output_dir(&cli, &cfg);
            simulate::run_simulate(&cfg, &dir)?;
            println!("bundle written to {}", dir.display());
            Ok(true)
        }
        Command::Scan { betas, ts } => {
            let dir = output_dir(&cli, &cfg);
            let sweep = if !betas.is_empty() || !ts.is_empty() {
                scan::SweepSpec {
                    betas: betas.clone(),
                    t_values: ts.clone(),
                }
            } else if let Some(block) = &cfg.sweep {
                scan::SweepSpec {
                    betas: block.betas.clone(),
                    t_values: block.t_values.clone(),
                }
            } else {
                scan::SweepSpec {
                    betas: Vec::new(),
                    t_values: Vec::new(),
                }
            };
            scan::run_scan(&cfg, &dir, &sweep)?;
            println!("scan bundle written to {}", dir.display());
            Ok(true)
        }
        Command::Analyze { records } => {
            let dir = output_dir(&cli, &cfg);
            let ok = analyze::run_analyze(&cfg, &dir, records, cli.allow_hash_mismatch)?;
            if ok {
                println!("analyze: all enabled checks pass");
            } else {
                println!("analyze: some checks FAILED (see reports.csv)");
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
