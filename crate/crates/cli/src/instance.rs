//! Instance descriptions shared by `allocate` and `verify`.
//!
//! An instance file is TOML:
//!
//! ```toml
//! t = 2                       # or a fraction of n such as 0.5
//! sigma_gamma = [3, 2, 1, 1]  # or: epsilons = [...], delta = 1e-5, sensitivity = 1
//! active = "all"              # or [0, 1], or { random = 2 }
//! ```

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use serde::Deserialize;
use tpmdp_core::mechanism::experiment::active_mask;
use tpmdp_core::mechanism::{ActiveSpec, ThresholdSpec};
use tpmdp_core::{PrivacyBudget, ThresholdInstance};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub t: ThresholdSpec,
    #[serde(default)]
    pub sigma_gamma: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    /// One delta shared by every party.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Per-party deltas; overrides `delta`.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    #[serde(default)]
    pub sensitivity: Option<f64>,
    #[serde(default)]
    pub active: Option<ActiveSpec>,
}

/// Inline instance flags.
#[derive(Debug, Clone, Default, Args)]
pub struct InstanceArgs {
    /// TOML instance file; overrides the global --config.
    #[arg(long)]
    pub instance: Option<std::path::PathBuf>,
    /// Collusion threshold: an integer, or a fraction of n such as 0.5.
    #[arg(long)]
    pub t: Option<String>,
    /// Comma-separated minimal noise standard deviations.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sigma_gamma: Option<Vec<f64>>,
    /// Comma-separated epsilons, calibrated with --delta and --sensitivity.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub sensitivity: Option<f64>,
    /// `all`, `random:<k>`, or comma-separated 0-based party indices.
    #[arg(long)]
    pub active: Option<String>,
}

impl InstanceArgs {
    pub fn is_empty(&self) -> bool {
        self.instance.is_none()
            && self.t.is_none()
            && self.sigma_gamma.is_none()
            && self.epsilons.is_none()
    }

    /// Builds the instance from a file (explicit or `fallback`) or inline flags.
    pub fn resolve(&self, fallback: Option<&Path>, seed: u64) -> anyhow::Result<ThresholdInstance> {
        let file = match self.instance.as_deref().or(fallback) {
            Some(path) => {
                if self.t.is_some() || self.sigma_gamma.is_some() || self.epsilons.is_some() {
                    bail!("give either an instance file or inline parameters, not both");
                }
                read_instance_file(path)?
            }
            None => InstanceFile {
                t: parse_threshold(
                    self.t
                        .as_deref()
                        .ok_or_else(|| anyhow!("--t is required"))?,
                )?,
                sigma_gamma: self.sigma_gamma.clone(),
                epsilons: self.epsilons.clone(),
                delta: self.delta,
                deltas: None,
                sensitivity: self.sensitivity,
                active: self.active.as_deref().map(parse_active).transpose()?,
            },
        };
        build_instance(&file, seed)
    }
}

pub fn read_instance_file(path: &Path) -> anyhow::Result<InstanceFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing instance file {}", path.display()))
}

pub fn parse_threshold(s: &str) -> anyhow::Result<ThresholdSpec> {
    let s = s.trim();
    if let Ok(t) = s.parse::<u64>() {
        return Ok(ThresholdSpec::Absolute(t));
    }
    s.parse::<f64>()
        .map(ThresholdSpec::Fraction)
        .map_err(|_| anyhow!("threshold {s:?} is neither an integer nor a fraction"))
}

pub fn parse_active(s: &str) -> anyhow::Result<ActiveSpec> {
    let s = s.trim();
    if s == "all" {
        return Ok(ActiveSpec::Keyword(
            tpmdp_core::mechanism::config::ActiveKeyword::All,
        ));
    }
    if let Some(k) = s.strip_prefix("random:") {
        let random = k
            .parse()
            .with_context(|| format!("bad active-party count {k:?}"))?;
        return Ok(ActiveSpec::Random(
            tpmdp_core::mechanism::config::RandomActive { random },
        ));
    }
    if s.is_empty() {
        return Ok(ActiveSpec::Explicit(Vec::new()));
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .with_context(|| format!("bad party index {p:?}"))
        })
        .collect::<anyhow::Result<_>>()
        .map(ActiveSpec::Explicit)
}

pub fn build_instance(file: &InstanceFile, seed: u64) -> anyhow::Result<ThresholdInstance> {
    let sigma_gamma = match (&file.sigma_gamma, &file.epsilons) {
        (Some(sg), None) => sg.clone(),
        (None, Some(eps)) => {
            let deltas = match (&file.deltas, file.delta) {
                (Some(d), _) => {
                    if d.len() != eps.len() {
                        bail!("{} deltas given for {} parties", d.len(), eps.len());
                    }
                    d.clone()
                }
                (None, Some(d)) => vec![d; eps.len()],
                (None, None) => bail!("epsilons need a delta"),
            };
            let budgets = eps
                .iter()
                .zip(&deltas)
                .map(|(&e, &d)| PrivacyBudget::new(e, d))
                .collect::<Result<Vec<_>, _>>()?;
            let inst = ThresholdInstance::from_budgets(
                0,
                vec![true; budgets.len()],
                &budgets,
                file.sensitivity.unwrap_or(1.0),
            )?;
            inst.sigma_gamma().to_vec()
        }
        (Some(_), Some(_)) => bail!("give either sigma_gamma or epsilons, not both"),
        (None, None) => bail!("the instance needs sigma_gamma or epsilons"),
    };
    let n = sigma_gamma.len();
    if n == 0 {
        bail!("the instance has no parties");
    }
    let t = file.t.resolve(n)?;
    let spec = file.active.clone().unwrap_or(ActiveSpec::Keyword(
        tpmdp_core::mechanism::config::ActiveKeyword::All,
    ));
    if let ActiveSpec::Explicit(list) = &spec {
        if let Some(i) = list.iter().find(|&&i| i >= n) {
            bail!("active party {i} out of range for n = {n}");
        }
    }
    if let ActiveSpec::Random(r) = &spec {
        if r.random > n {
            bail!("cannot pick {} active parties out of {n}", r.random);
        }
    }
    let mask = active_mask(&spec, n, seed);
    if let ActiveSpec::Explicit(list) = &spec {
        if mask.iter().filter(|&&a| a).count() != list.len() {
            bail!("active party list contains duplicates");
        }
    }
    Ok(ThresholdInstance::from_mask(t, mask, sigma_gamma)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_parsing() {
        assert_eq!(parse_threshold("3").unwrap(), ThresholdSpec::Absolute(3));
        assert_eq!(
            parse_threshold("0.5").unwrap(),
            ThresholdSpec::Fraction(0.5)
        );
        assert!(parse_threshold("half").is_err());
    }

    #[test]
    fn active_parsing() {
        assert!(matches!(
            parse_active("all").unwrap(),
            ActiveSpec::Keyword(_)
        ));
        assert_eq!(
            parse_active("0, 2").unwrap(),
            ActiveSpec::Explicit(vec![0, 2])
        );
        assert!(matches!(
            parse_active("random:3").unwrap(),
            ActiveSpec::Random(_)
        ));
        assert!(parse_active("x").is_err());
    }

    #[test]
    fn instance_file_round_trip() {
        let file: InstanceFile =
            toml::from_str("t = 2\nsigma_gamma = [2.0, 1.0, 1.5, 0.5, 0.5]\nactive = [0, 1]\n")
                .unwrap();
        let inst = build_instance(&file, 0).unwrap();
        assert_eq!(inst.active_count(), 2);
        assert_eq!(tpmdp_core::allocate(&inst).total, 5.125);

        let frac: InstanceFile =
            toml::from_str("t = 0.5\nepsilons = [1.0, 1.0, 0.5, 0.5]\ndelta = 1e-5\n").unwrap();
        assert_eq!(build_instance(&frac, 0).unwrap().t(), 2);

        assert!(toml::from_str::<InstanceFile>("t = 1\nsigma = [1.0]\n").is_err());
        let dup: InstanceFile =
            toml::from_str("t = 1\nsigma_gamma = [1.0, 1.0]\nactive = [0, 0]\n").unwrap();
        assert!(build_instance(&dup, 0).is_err());
    }
}
