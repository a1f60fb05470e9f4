//! Command-line driver: one subcommand per toolkit module, a TOML config
//! file with flag overrides, and CSV/JSONL reports under `--out`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;

pub use config::Config;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] lo1d_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            // invalid or unsupported inputs surface from the core as well
            CliError::Runtime(lo1d_core::Error::CoulombSingular)
            | CliError::Runtime(lo1d_core::Error::IncompatibleSpec { .. })
            | CliError::Runtime(lo1d_core::Error::InvalidParameter(_)) => EXIT_CONFIG,
            CliError::Runtime(_) | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lo1d", version, about = "Check Lieb-Oxford lower bounds in one dimension against trial states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file; every field is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; each subcommand writes into its own subdirectory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Relative slack tolerance for bound checks.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check proven bounds on trial states.
    Verify,
    /// Tabulate moment integrals and certify the moment conditions.
    Moments,
    /// Search trial families for the largest ratio `−I_xc/∫ρ²`.
    Optimize,
    /// Hubbard-model energy sweeps and the site-occupation bound.
    Hubbard,
    /// Maximal-function norm ratios on random profiles.
    Maximal,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Moments => "moments",
            Command::Optimize => "optimize",
            Command::Hubbard => "hubbard",
            Command::Maximal => "maximal",
        }
    }
}

/// Loads the config and applies flag overrides.
pub fn resolve_config(args: &CommonArgs) -> Result<Config, CliError> {
    let mut config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = out.clone();
    }
    if let Some(jobs) = args.jobs {
        config.jobs = jobs;
    }
    if let Some(tol) = args.tolerance {
        config.tolerance = tol;
    }
    config.validate()?;
    Ok(config)
}

/// Runs one subcommand and returns its exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = resolve_config(&cli.common).and_then(|config| {
        if config.jobs > 0 {
            // a pool may already exist when called repeatedly in-process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build_global();
        }
        commands::dispatch(cli.command, &config)
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
