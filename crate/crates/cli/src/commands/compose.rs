use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tpmdp_core::composition::{compose, CompositionMode, CompositionRequest, MechanismBudgets};
use tpmdp_core::PrivacyBudget;

use crate::{csv_writer, CliResult, Globals, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Basic,
    Advanced,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// CSV with columns mechanism, party, epsilon, delta and optionally t.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Basic)]
    pub mode: Mode,
    /// Extra failure probability per party for advanced composition.
    #[arg(long)]
    pub delta_prime: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct TableRow {
    mechanism: String,
    party: usize,
    #[serde(default)]
    t: Option<usize>,
    epsilon: f64,
    delta: f64,
}

#[derive(Serialize)]
struct ComposedRow {
    schema_version: u32,
    party: usize,
    t: usize,
    epsilon: f64,
    delta: f64,
}

/// Groups table rows by mechanism (in first-appearance order) into per-party budget lists.
pub fn read_table(path: &Path) -> anyhow::Result<Vec<MechanismBudgets>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, (Option<usize>, BTreeMap<usize, PrivacyBudget>)> =
        BTreeMap::new();
    for (line, row) in reader.deserialize::<TableRow>().enumerate() {
        let row = row.with_context(|| format!("table row {}", line + 1))?;
        let budget = PrivacyBudget::new(row.epsilon, row.delta)
            .with_context(|| format!("table row {}", line + 1))?;
        if !groups.contains_key(&row.mechanism) {
            order.push(row.mechanism.clone());
        }
        let entry = groups.entry(row.mechanism.clone()).or_default();
        match (entry.0, row.t) {
            (Some(a), Some(b)) if a != b => {
                bail!(
                    "mechanism {:?} lists two thresholds ({a} and {b})",
                    row.mechanism
                )
            }
            (None, Some(b)) => entry.0 = Some(b),
            _ => {}
        }
        if entry.1.insert(row.party, budget).is_some() {
            bail!(
                "mechanism {:?} lists party {} twice",
                row.mechanism,
                row.party
            );
        }
    }
    if order.is_empty() {
        bail!("the budget table is empty");
    }
    order
        .into_iter()
        .map(|name| {
            let (t, parties) = groups.remove(&name).expect("grouped above");
            let n = parties.len();
            if parties.keys().copied().ne(0..n) {
                bail!("mechanism {name:?} must list parties 0..{n} exactly once");
            }
            Ok(MechanismBudgets {
                t: t.unwrap_or(0),
                budgets: parties.into_values().collect(),
            })
        })
        .collect()
}

pub fn run(globals: &Globals, args: ComposeArgs) -> CliResult {
    let mechanisms = read_table(&args.table)?;
    let mode = match (args.mode, args.delta_prime) {
        (Mode::Basic, None) => CompositionMode::Basic,
        (Mode::Basic, Some(_)) => {
            return Err(anyhow::anyhow!("--delta-prime only applies to advanced mode").into())
        }
        (Mode::Advanced, Some(d)) => CompositionMode::Advanced {
            delta_prime: vec![d; mechanisms[0].budgets.len()],
        },
        (Mode::Advanced, None) => {
            return Err(anyhow::anyhow!("advanced mode needs --delta-prime").into())
        }
    };
    let composed = compose(&CompositionRequest { mechanisms, mode })?;
    let mut out = csv_writer(globals.out.as_deref())?;
    for (party, b) in composed.budgets.iter().enumerate() {
        out.serialize(ComposedRow {
            schema_version: SCHEMA_VERSION,
            party,
            t: composed.t,
            epsilon: b.epsilon(),
            delta: b.delta(),
        })?;
    }
    out.flush()?;
    Ok(())
}
