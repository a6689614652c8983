//! Command-line front-end for the tpmdp allocator.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod commands;
pub mod instance;

/// Version of every CSV layout written by this tool.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "tpmdp",
    version,
    about = "Noise allocation for threshold personalized multi-party differential privacy"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write CSV output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML configuration (experiment) or instance (allocate, verify) file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel work; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the optimal per-party noise variances for one instance.
    Allocate(commands::allocate::AllocateArgs),
    /// Compare the allocator with the exhaustive LP solver.
    Verify(commands::verify::VerifyArgs),
    /// Time the allocator over a range of party counts.
    Bench(commands::bench::BenchArgs),
    /// Run the utility comparison against the baselines.
    Experiment(commands::experiment::ExperimentArgs),
    /// Compose per-party budgets of sequential mechanisms.
    Compose(commands::compose::ComposeArgs),
}

/// Failure classes, mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum CliError {
    Input(anyhow::Error),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "input error: {e:#}"),
            CliError::Verification(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

macro_rules! input_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.into())
            }
        }
    )*};
}

input_error_from!(
    anyhow::Error,
    tpmdp_core::Error,
    io::Error,
    csv::Error,
    toml::de::Error,
    rayon::ThreadPoolBuildError
);

pub type CliResult<T = ()> = Result<T, CliError>;

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Input(anyhow::anyhow!(
                "--threads must be positive"
            )));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()?;
    }
    let globals = Globals {
        seed: cli.seed,
        out: cli.out,
        config: cli.config,
    };
    match cli.command {
        Command::Allocate(args) => commands::allocate::run(&globals, args),
        Command::Verify(args) => commands::verify::run(&globals, args),
        Command::Bench(args) => commands::bench::run(&globals, args),
        Command::Experiment(args) => commands::experiment::run(&globals, args),
        Command::Compose(args) => commands::compose::run(&globals, args),
    }
}

/// CSV writer targeting `path`, or stdout when absent.
pub fn csv_writer(path: Option<&Path>) -> anyhow::Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                anyhow::anyhow!("cannot create {}: {e}", p.display())
            })?))
        }
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}
