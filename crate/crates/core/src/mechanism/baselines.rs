//! Personalized baselines that do not use the threshold allocation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::population::{PartyData, Population};
use super::regression::functional_linreg;
use super::rng::{stream_rng, Domain};
use crate::calibration::{
    partial_sensitivity, sigma_gamma, CalibrationTriple, PrivacyBudget, QueryKind, DEFAULT_REL_TOL,
};
use crate::error::{Error, Result};

/// Sampling rate for a record with budget `epsilon` when the mechanism runs at `target`.
pub fn sampling_probability(epsilon: f64, target: f64) -> f64 {
    if epsilon >= target {
        1.0
    } else {
        epsilon.exp_m1() / target.exp_m1()
    }
}

/// Common budget of the sampling baseline: mean epsilon and the largest delta.
pub fn sampling_target(budgets: &[PrivacyBudget]) -> Result<PrivacyBudget> {
    if budgets.is_empty() {
        return Err(Error::Empty("budgets"));
    }
    let eps = budgets.iter().map(|b| b.epsilon()).sum::<f64>() / budgets.len() as f64;
    let delta = budgets.iter().map(|b| b.delta()).fold(0.0, f64::max);
    PrivacyBudget::new(eps, delta)
}

/// Indices of the records kept by independent per-record coin flips.
pub fn sample_records(budgets: &[PrivacyBudget], rows: &[usize], seed: u64) -> Result<Vec<usize>> {
    let target = sampling_target(budgets)?.epsilon();
    let mut rng = stream_rng(seed, Domain::Sampling, 0);
    Ok(rows
        .iter()
        .copied()
        .filter(|&r| {
            let p = sampling_probability(budgets[r].epsilon(), target);
            rng.random_bool(p.clamp(0.0, 1.0))
        })
        .collect())
}

fn target_sigma(pop: &Population, query: QueryKind) -> Result<f64> {
    let target = sampling_target(&pop.budgets)?;
    let triple = CalibrationTriple::new(target, partial_sensitivity(query)?)?;
    Ok(sigma_gamma(&triple, DEFAULT_REL_TOL)?.sigma)
}

/// Sampling baseline for the count query: subsample, then a centralized Gaussian
/// mechanism at the mean budget. Returns the noisy count of the kept records.
pub fn baseline_sample(pop: &Population, seed: u64) -> Result<f64> {
    let PartyData::Count(bits) = &pop.data else {
        return Err(Error::UnsupportedQuery(
            "count baseline on regression data".into(),
        ));
    };
    let sigma = target_sigma(pop, QueryKind::Count)?;
    let all: Vec<usize> = (0..pop.n()).collect();
    let kept = sample_records(&pop.budgets, &all, seed)?;
    let count = kept.iter().filter(|&&r| bits[r]).count() as f64;
    let z: f64 = StandardNormal.sample(&mut stream_rng(seed, Domain::CentralNoise, 0));
    Ok(count + sigma * z)
}

/// Sampling baseline for regression: subsample the training rows, then release
/// the perturbed statistics at the mean budget.
pub fn baseline_sample_regression(
    pop: &Population,
    train: &[usize],
    seed: u64,
) -> Result<Vec<f64>> {
    let PartyData::Regression {
        features,
        labels,
        dims,
        ..
    } = &pop.data
    else {
        return Err(Error::UnsupportedQuery(
            "regression baseline on count data".into(),
        ));
    };
    let sigma = target_sigma(pop, QueryKind::FunctionalLinReg { dims: *dims })?;
    let kept = sample_records(&pop.budgets, train, seed)?;
    functional_linreg(features, labels, *dims, kept, sigma, seed)
}

/// Reporting probability of the true bit under randomized response at `epsilon`.
pub fn truth_probability(epsilon: f64) -> f64 {
    1.0 / (1.0 + (-epsilon).exp())
}

/// Local randomized response: each party flips its bit with probability
/// `1 / (1 + e^eps_i)` and the aggregator sums the debiased reports.
pub fn baseline_randomized_response(pop: &Population, seed: u64) -> Result<f64> {
    let PartyData::Count(bits) = &pop.data else {
        return Err(Error::UnsupportedQuery(
            "randomized response needs binary data".into(),
        ));
    };
    if let Some(i) = pop.budgets.iter().position(|b| b.epsilon() == 0.0) {
        return Err(Error::InvalidBudget(format!(
            "party {i} has epsilon = 0, which makes randomized response uninformative"
        )));
    }
    let mut estimate = 0.0;
    for (i, (&bit, b)) in bits.iter().zip(&pop.budgets).enumerate() {
        let p = truth_probability(b.epsilon());
        let mut rng = stream_rng(seed, Domain::RandomizedResponse, i as u64);
        let report = if rng.random_bool(p) { bit } else { !bit };
        let r = f64::from(u8::from(report));
        estimate += (r - (1.0 - p)) / (2.0 * p - 1.0);
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::population::{generate_population, BudgetGroup, PopulationParams};

    #[test]
    fn sampling_probability_examples() {
        assert_eq!(sampling_probability(0.5, 0.5), 1.0);
        assert_eq!(sampling_probability(0.9, 0.5), 1.0);
        assert_eq!(sampling_probability(0.0, 0.5), 0.0);
        let p = sampling_probability(0.1, 0.5);
        assert!((p - 0.1f64.exp_m1() / 0.5f64.exp_m1()).abs() < 1e-15);
    }

    #[test]
    fn default_population_sampling_rates() {
        let pop = generate_population(&PopulationParams::count_defaults(1000), 3).unwrap();
        let target = sampling_target(&pop.budgets).unwrap().epsilon();
        for (g, b) in pop.groups.iter().zip(&pop.budgets) {
            let p = sampling_probability(b.epsilon(), target);
            assert!(p > 0.0 && p <= 1.0);
            if *g == BudgetGroup::Liberal {
                assert_eq!(p, 1.0);
            }
        }
    }

    #[test]
    fn randomized_response_arithmetic() {
        assert!((truth_probability(3f64.ln()) - 0.75).abs() < 1e-15);
        assert!(truth_probability(40.0) > 1.0 - 1e-15);
    }

    #[test]
    fn randomized_response_rejects_zero_epsilon() {
        let mut params = PopulationParams::count_defaults(20);
        params.eps_conservative = 0.0;
        params.eps_moderate = 0.0;
        params.f_conservative = 1.0;
        params.f_moderate = 0.0;
        let pop = generate_population(&params, 0).unwrap();
        assert!(baseline_randomized_response(&pop, 0).is_err());
    }

    #[test]
    fn huge_epsilon_gives_exact_count() {
        let mut params = PopulationParams::count_defaults(200);
        params.eps_conservative = 60.0;
        params.eps_moderate = 60.0;
        params.eps_liberal = 60.0;
        let pop = generate_population(&params, 4).unwrap();
        let est = baseline_randomized_response(&pop, 8).unwrap();
        assert!((est - pop.true_count().unwrap()).abs() < 1e-9);
    }
}
