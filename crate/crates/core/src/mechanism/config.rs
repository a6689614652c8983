//! Experiment configuration.

use serde::{Deserialize, Serialize};

use super::population::{PopulationParams, Workload};
use crate::calibration::QueryKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryName {
    Count,
    Regression,
}

/// Collusion threshold, either absolute or as a fraction of `n` (rounded down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSpec {
    Absolute(u64),
    Fraction(f64),
}

impl ThresholdSpec {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let t = match *self {
            ThresholdSpec::Absolute(t) => t as usize,
            ThresholdSpec::Fraction(f) => {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::InvalidConfig(format!(
                        "threshold fraction {f} must lie in [0, 1]"
                    )));
                }
                (f * n as f64).floor() as usize
            }
        };
        if n == 0 || t > n - 1 {
            return Err(Error::InvalidConfig(format!(
                "threshold {t} must be at most n - 1 = {}",
                n.saturating_sub(1)
            )));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaKeyword {
    #[serde(rename = "1/(10n)")]
    TenthOverN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaRule {
    Fixed(f64),
    Rule(DeltaKeyword),
}

impl DeltaRule {
    pub fn resolve(&self, n: usize) -> f64 {
        match *self {
            DeltaRule::Fixed(d) => d,
            DeltaRule::Rule(DeltaKeyword::TenthOverN) => 1.0 / (10.0 * n as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActiveKeyword {
    #[serde(rename = "all")]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomActive {
    pub random: usize,
}

/// Which parties receive the output: `"all"`, `{ random = k }`, or a list of indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActiveSpec {
    Keyword(ActiveKeyword),
    Random(RandomActive),
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::query")]
    pub query: QueryName,
    #[serde(default = "defaults::n")]
    pub n: usize,
    #[serde(default = "defaults::t")]
    pub t: ThresholdSpec,
    /// Probability that a party's bit is set (count query).
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    #[serde(default = "defaults::f_conservative")]
    pub f_conservative: f64,
    #[serde(default = "defaults::f_moderate")]
    pub f_moderate: f64,
    #[serde(default = "defaults::eps_conservative")]
    pub eps_conservative: f64,
    #[serde(default = "defaults::eps_moderate")]
    pub eps_moderate: f64,
    #[serde(default = "defaults::eps_liberal")]
    pub eps_liberal: f64,
    #[serde(default = "defaults::delta")]
    pub delta: DeltaRule,
    #[serde(default = "defaults::active")]
    pub active: ActiveSpec,
    /// Defaults to 100 for count and 20 for regression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(default = "defaults::folds")]
    pub folds: usize,
    #[serde(default = "defaults::dims")]
    pub dims: usize,
    #[serde(default = "defaults::label_noise")]
    pub label_noise: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

mod defaults {
    use super::*;

    pub fn query() -> QueryName {
        QueryName::Count
    }
    pub fn n() -> usize {
        1000
    }
    pub fn t() -> ThresholdSpec {
        ThresholdSpec::Fraction(0.5)
    }
    pub fn rho() -> f64 {
        0.15
    }
    pub fn f_conservative() -> f64 {
        0.54
    }
    pub fn f_moderate() -> f64 {
        0.37
    }
    pub fn eps_conservative() -> f64 {
        0.01
    }
    pub fn eps_moderate() -> f64 {
        0.2
    }
    pub fn eps_liberal() -> f64 {
        1.0
    }
    pub fn delta() -> DeltaRule {
        DeltaRule::Rule(DeltaKeyword::TenthOverN)
    }
    pub fn active() -> ActiveSpec {
        ActiveSpec::Keyword(ActiveKeyword::All)
    }
    pub fn folds() -> usize {
        5
    }
    pub fn dims() -> usize {
        4
    }
    pub fn label_noise() -> f64 {
        0.1
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            query: defaults::query(),
            n: defaults::n(),
            t: defaults::t(),
            rho: defaults::rho(),
            f_conservative: defaults::f_conservative(),
            f_moderate: defaults::f_moderate(),
            eps_conservative: defaults::eps_conservative(),
            eps_moderate: defaults::eps_moderate(),
            eps_liberal: defaults::eps_liberal(),
            delta: defaults::delta(),
            active: defaults::active(),
            repetitions: None,
            folds: defaults::folds(),
            dims: defaults::dims(),
            label_noise: defaults::label_noise(),
            seed: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn query_kind(&self) -> QueryKind {
        match self.query {
            QueryName::Count => QueryKind::Count,
            QueryName::Regression => QueryKind::FunctionalLinReg { dims: self.dims },
        }
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions.unwrap_or(match self.query {
            QueryName::Count => 100,
            QueryName::Regression => 20,
        })
    }

    pub fn threshold(&self) -> Result<usize> {
        self.t.resolve(self.n)
    }

    pub fn population_params(&self) -> PopulationParams {
        PopulationParams {
            n: self.n,
            workload: match self.query {
                QueryName::Count => Workload::Count { rho: self.rho },
                QueryName::Regression => Workload::Regression {
                    dims: self.dims,
                    label_noise: self.label_noise,
                },
            },
            f_conservative: self.f_conservative,
            f_moderate: self.f_moderate,
            eps_conservative: self.eps_conservative,
            eps_moderate: self.eps_moderate,
            eps_liberal: self.eps_liberal,
            delta: self.delta.resolve(self.n),
        }
    }

    /// Checks every field before any work is done.
    pub fn validate(&self) -> Result<()> {
        self.population_params().validate()?;
        self.threshold()?;
        if self.repetitions() == 0 {
            return Err(Error::InvalidConfig("repetitions must be positive".into()));
        }
        match &self.active {
            ActiveSpec::Keyword(ActiveKeyword::All) => {}
            ActiveSpec::Random(RandomActive { random }) if *random > self.n => {
                return Err(Error::InvalidConfig(format!(
                    "cannot pick {random} active parties out of {}",
                    self.n
                )));
            }
            ActiveSpec::Random(_) => {}
            ActiveSpec::Explicit(list) => {
                let mut seen = vec![false; self.n];
                for &i in list {
                    if i >= self.n || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::InvalidConfig(format!(
                            "active party {i} is out of range or repeated"
                        )));
                    }
                }
            }
        }
        match self.query {
            QueryName::Count if self.eps_conservative <= 0.0 => Err(Error::InvalidConfig(
                "randomized response needs every epsilon to be positive".into(),
            )),
            QueryName::Regression if self.folds < 2 || self.folds > self.n => {
                Err(Error::InvalidConfig(format!(
                    "{} folds do not fit {} records",
                    self.folds, self.n
                )))
            }
            _ => Ok(()),
        }
    }
}
