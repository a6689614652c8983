//! Synthetic parties with heterogeneous budgets.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::rng::{stream_rng, Domain};
use crate::calibration::PrivacyBudget;
use crate::error::{Error, Result};

/// Privacy attitude of a party; determines the range its epsilon is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetGroup {
    Conservative,
    Moderate,
    Liberal,
}

/// Shape of each party's record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Workload {
    /// One bit per party, set with probability `rho`.
    Count { rho: f64 },
    /// One `(x, y)` pair per party with `x` uniform on `[-1, 1]^dims` and
    /// `y = clamp(x . w + N(0, label_noise^2), -1, 1)`.
    Regression { dims: usize, label_noise: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationParams {
    pub n: usize,
    pub workload: Workload,
    pub f_conservative: f64,
    pub f_moderate: f64,
    pub eps_conservative: f64,
    pub eps_moderate: f64,
    pub eps_liberal: f64,
    pub delta: f64,
}

impl PopulationParams {
    pub fn count_defaults(n: usize) -> Self {
        Self {
            n,
            workload: Workload::Count { rho: 0.15 },
            f_conservative: 0.54,
            f_moderate: 0.37,
            eps_conservative: 0.01,
            eps_moderate: 0.2,
            eps_liberal: 1.0,
            delta: 1.0 / (10.0 * n as f64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        let (fc, fm) = (self.f_conservative, self.f_moderate);
        if !(0.0..=1.0).contains(&fc) || !(0.0..=1.0).contains(&fm) || fc + fm > 1.0 + 1e-12 {
            return bad(format!(
                "group fractions ({fc}, {fm}) must lie in [0, 1] and sum to at most 1"
            ));
        }
        let (ec, em, el) = (self.eps_conservative, self.eps_moderate, self.eps_liberal);
        if !(ec.is_finite() && el.is_finite() && 0.0 <= ec && ec <= em && em <= el) {
            return bad(format!("epsilons must satisfy 0 <= {ec} <= {em} <= {el}"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta = {} must lie in (0, 1]", self.delta));
        }
        match self.workload {
            Workload::Count { rho } if !(0.0..=1.0).contains(&rho) => {
                bad(format!("rho = {rho} must lie in [0, 1]"))
            }
            Workload::Regression { dims: 0, .. } => {
                bad("regression needs at least one feature".into())
            }
            Workload::Regression { label_noise, .. }
                if !(label_noise >= 0.0 && label_noise.is_finite()) =>
            {
                bad(format!(
                    "label noise {label_noise} must be finite and nonnegative"
                ))
            }
            _ => Ok(()),
        }
    }

    /// Group sizes `(conservative, moderate, liberal)` after rounding.
    pub fn group_sizes(&self) -> (usize, usize, usize) {
        let n = self.n;
        let c = ((self.f_conservative * n as f64).round() as usize).min(n);
        let m = ((self.f_moderate * n as f64).round() as usize).min(n - c);
        (c, m, n - c - m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PartyData {
    Count(Vec<bool>),
    Regression {
        /// Row-major `n x dims`.
        features: Vec<f64>,
        labels: Vec<f64>,
        dims: usize,
        true_weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub groups: Vec<BudgetGroup>,
    pub budgets: Vec<PrivacyBudget>,
    pub data: PartyData,
}

impl Population {
    pub fn n(&self) -> usize {
        self.budgets.len()
    }

    pub fn true_count(&self) -> Option<f64> {
        match &self.data {
            PartyData::Count(bits) => Some(bits.iter().filter(|&&b| b).count() as f64),
            PartyData::Regression { .. } => None,
        }
    }
}

pub fn generate_population(params: &PopulationParams, seed: u64) -> Result<Population> {
    params.validate()?;
    let n = params.n;
    let (c, m, l) = params.group_sizes();

    let mut rng = stream_rng(seed, Domain::Population, 0);
    let mut groups: Vec<BudgetGroup> = std::iter::repeat_n(BudgetGroup::Conservative, c)
        .chain(std::iter::repeat_n(BudgetGroup::Moderate, m))
        .chain(std::iter::repeat_n(BudgetGroup::Liberal, l))
        .collect();
    groups.shuffle(&mut rng);

    let budgets = groups
        .iter()
        .map(|g| {
            let eps = match g {
                BudgetGroup::Conservative => {
                    uniform(&mut rng, params.eps_conservative, params.eps_moderate)
                }
                BudgetGroup::Moderate => uniform(&mut rng, params.eps_moderate, params.eps_liberal),
                BudgetGroup::Liberal => params.eps_liberal,
            };
            PrivacyBudget::new(eps, params.delta)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut data_rng = stream_rng(seed, Domain::Population, 1);
    let data = match params.workload {
        Workload::Count { rho } => {
            PartyData::Count((0..n).map(|_| data_rng.random_bool(rho)).collect())
        }
        Workload::Regression { dims, label_noise } => {
            let scale = 1.0 / dims as f64;
            let true_weights: Vec<f64> = (0..dims)
                .map(|_| data_rng.random_range(-1.0..=1.0) * scale)
                .collect();
            let mut features = Vec::with_capacity(n * dims);
            let mut labels = Vec::with_capacity(n);
            for _ in 0..n {
                let x: Vec<f64> = (0..dims)
                    .map(|_| data_rng.random_range(-1.0..=1.0))
                    .collect();
                let z: f64 = StandardNormal.sample(&mut data_rng);
                let signal: f64 = x.iter().zip(&true_weights).map(|(a, b)| a * b).sum();
                labels.push((signal + label_noise * z).clamp(-1.0, 1.0));
                features.extend(x);
            }
            PartyData::Regression {
                features,
                labels,
                dims,
                true_weights,
            }
        }
    };

    Ok(Population {
        groups,
        budgets,
        data,
    })
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_population_respects_groups() {
        let params = PopulationParams::count_defaults(1000);
        let pop = generate_population(&params, 5).unwrap();
        assert_eq!(pop.n(), 1000);
        let count = |g| pop.groups.iter().filter(|&&x| x == g).count();
        assert_eq!(count(BudgetGroup::Conservative), 540);
        assert_eq!(count(BudgetGroup::Moderate), 370);
        assert_eq!(count(BudgetGroup::Liberal), 90);
        for (g, b) in pop.groups.iter().zip(&pop.budgets) {
            let e = b.epsilon();
            match g {
                BudgetGroup::Conservative => assert!((0.01..=0.2).contains(&e)),
                BudgetGroup::Moderate => assert!((0.2..=1.0).contains(&e)),
                BudgetGroup::Liberal => assert_eq!(e, 1.0),
            }
            assert_eq!(b.delta(), 1e-4);
        }
        assert_eq!(pop, generate_population(&params, 5).unwrap());
        assert_ne!(pop, generate_population(&params, 6).unwrap());
    }

    #[test]
    fn extreme_parameters() {
        let mut params = PopulationParams::count_defaults(50);
        params.f_conservative = 1.0;
        params.f_moderate = 0.0;
        params.workload = Workload::Count { rho: 0.0 };
        let pop = generate_population(&params, 1).unwrap();
        assert!(pop
            .budgets
            .iter()
            .all(|b| (0.01..=0.2).contains(&b.epsilon())));
        assert_eq!(pop.true_count(), Some(0.0));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut params = PopulationParams::count_defaults(10);
        params.f_conservative = 0.7;
        params.f_moderate = 0.5;
        assert!(generate_population(&params, 0).is_err());
        let mut params = PopulationParams::count_defaults(10);
        params.eps_moderate = 2.0;
        assert!(params.validate().is_err());
        params = PopulationParams::count_defaults(10);
        params.workload = Workload::Count { rho: 1.5 };
        assert!(params.validate().is_err());
    }

    #[test]
    fn regression_data_is_normalized() {
        let mut params = PopulationParams::count_defaults(200);
        params.workload = Workload::Regression {
            dims: 3,
            label_noise: 0.1,
        };
        let pop = generate_population(&params, 2).unwrap();
        let PartyData::Regression {
            features,
            labels,
            dims,
            ..
        } = &pop.data
        else {
            panic!("expected regression data");
        };
        assert_eq!(*dims, 3);
        assert_eq!(features.len(), 600);
        assert!(features
            .iter()
            .chain(labels)
            .all(|v| (-1.0..=1.0).contains(v)));
    }
}
