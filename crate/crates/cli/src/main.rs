//! `qip`: configuration-driven front end for embeddings, projection solves,
//! verification sweeps, and Monte Carlo experiments.
//!
//! Exit codes are a stable contract: 0 success, 2 configuration error,
//! 3 numerical/runtime failure, 4 verification or bound failure.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Verification(m) => m,
        }
    }
}

/// Treat a core error as a runtime (numerical) failure.
pub fn numerical(e: qip_core::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Parser)]
#[command(name = "qip", version, about = "quantum information projection toolkit")]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the one in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for artifacts (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for trial execution.
    #[arg(long, global = true, env = "QIP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed the configured distribution; write the population state and
    /// optionally an empirical one.
    Embed,
    /// Solve the maximum-likelihood projection onto the configured class.
    Solve,
    /// Project a state onto a basis-diagonal mixture family.
    Project,
    /// Run the verification sweeps; exit 4 if any check fails.
    Verify,
    /// Run the configured Monte Carlo experiment and write CSV artifacts.
    Experiment,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        // A pool may already exist (e.g. under tests); that's fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let (mut cfg, raw) = config::Config::load(config_path)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    let out_dir = cli.out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let ctx = commands::RunContext::new(cfg, raw, config_path, out_dir);
    match cli.command {
        Command::Embed => commands::cmd_embed(&ctx),
        Command::Solve => commands::cmd_solve(&ctx),
        Command::Project => commands::cmd_project(&ctx),
        Command::Verify => commands::cmd_verify(&ctx),
        Command::Experiment => commands::cmd_experiment(&ctx),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
