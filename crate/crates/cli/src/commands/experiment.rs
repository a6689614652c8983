use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::Serialize;
use tpmdp_core::mechanism::{run_experiment, ExperimentConfig, ExperimentReport};

use crate::{csv_writer, CliResult, Globals, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Print the default configuration as TOML and exit.
    #[arg(long)]
    pub print_default_config: bool,
}

#[derive(Serialize)]
struct ExperimentRow<'a> {
    schema_version: u32,
    row_kind: &'a str,
    mechanism: &'a str,
    repetition: Option<usize>,
    n: usize,
    t: usize,
    active_count: Option<usize>,
    total_variance: Option<f64>,
    rmse: f64,
}

pub fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    Ok(cfg)
}

pub fn write_report(report: &ExperimentReport, path: Option<&Path>) -> anyhow::Result<()> {
    let mut out = csv_writer(path)?;
    for r in &report.runs {
        out.serialize(ExperimentRow {
            schema_version: SCHEMA_VERSION,
            row_kind: "run",
            mechanism: r.mechanism.as_str(),
            repetition: Some(r.repetition),
            n: report.n,
            t: report.t,
            active_count: Some(r.active_count),
            total_variance: r.total_variance,
            rmse: r.rmse,
        })?;
    }
    for s in &report.summaries {
        out.serialize(ExperimentRow {
            schema_version: SCHEMA_VERSION,
            row_kind: "summary",
            mechanism: s.mechanism.as_str(),
            repetition: None,
            n: report.n,
            t: report.t,
            active_count: None,
            total_variance: None,
            rmse: s.rmse,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn run(globals: &Globals, args: ExperimentArgs) -> CliResult {
    if args.print_default_config {
        print!(
            "{}",
            toml::to_string(&ExperimentConfig::default()).context("serializing defaults")?
        );
        return Ok(());
    }
    let mut cfg = match &globals.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = globals.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let out: Option<PathBuf> = globals
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let report = run_experiment(&cfg)?;
    write_report(&report, out.as_deref())?;
    Ok(())
}
