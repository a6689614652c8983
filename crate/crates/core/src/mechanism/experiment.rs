//! Repeated comparison of the threshold mechanism against the baselines.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::baselines::{baseline_randomized_response, baseline_sample, baseline_sample_regression};
use super::config::{ActiveKeyword, ActiveSpec, ExperimentConfig, QueryName, RandomActive};
use super::metrics::{evaluate_rmse, fold_assignment};
use super::population::{generate_population, PartyData, Population};
use super::regression::{functional_linreg, prediction_rmse, solve_weights, sufficient_statistics};
use super::rng::{derive_seed, stream_rng, Domain};
use super::run::{run_centralized, run_mechanism};
use crate::allocator::{
    allocate, baseline_min_centralized, baseline_non_threshold, baseline_tmdp, Allocation,
    ThresholdInstance,
};
use crate::calibration::partial_sensitivity;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MechanismKind {
    /// Optimal threshold allocation.
    #[serde(rename = "G")]
    Threshold,
    #[serde(rename = "non-thre")]
    NonThreshold,
    #[serde(rename = "TMDP")]
    Uniform,
    #[serde(rename = "MIN")]
    Centralized,
    #[serde(rename = "Sample")]
    Sample,
    /// Local randomized response (count only).
    #[serde(rename = "PLDP")]
    RandomizedResponse,
    /// No noise at all.
    #[serde(rename = "non-pri")]
    NonPrivate,
}

impl MechanismKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MechanismKind::Threshold => "G",
            MechanismKind::NonThreshold => "non-thre",
            MechanismKind::Uniform => "TMDP",
            MechanismKind::Centralized => "MIN",
            MechanismKind::Sample => "Sample",
            MechanismKind::RandomizedResponse => "PLDP",
            MechanismKind::NonPrivate => "non-pri",
        }
    }

    pub fn for_query(query: QueryName) -> &'static [MechanismKind] {
        use MechanismKind::*;
        match query {
            QueryName::Count => &[
                Threshold,
                NonThreshold,
                Uniform,
                Centralized,
                Sample,
                RandomizedResponse,
                NonPrivate,
            ],
            QueryName::Regression => &[
                Threshold,
                NonThreshold,
                Uniform,
                Centralized,
                Sample,
                NonPrivate,
            ],
        }
    }
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub mechanism: MechanismKind,
    pub active_count: usize,
    /// Aggregate noise variance per coordinate; `None` for mechanisms without one.
    pub total_variance: Option<f64>,
    /// Absolute error of the count, or cross-validated prediction RMSE.
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRecord {
    pub mechanism: MechanismKind,
    pub repetitions: usize,
    /// Count: root mean squared error over repetitions. Regression: mean of the
    /// per-repetition RMSE.
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub query: QueryName,
    pub n: usize,
    pub t: usize,
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<SummaryRecord>,
}

/// Resolves the active-set spec for one population.
pub fn active_mask(spec: &ActiveSpec, n: usize, seed: u64) -> Vec<bool> {
    match spec {
        ActiveSpec::Keyword(ActiveKeyword::All) => vec![true; n],
        ActiveSpec::Random(RandomActive { random }) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut stream_rng(seed, Domain::ActiveSet, 0));
            let mut mask = vec![false; n];
            for &i in &order[..*random] {
                mask[i] = true;
            }
            mask
        }
        ActiveSpec::Explicit(list) => {
            let mut mask = vec![false; n];
            for &i in list {
                mask[i] = true;
            }
            mask
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let t = cfg.threshold()?;
    let params = cfg.population_params();
    let mechanisms = MechanismKind::for_query(cfg.query);

    let per_rep: Vec<Vec<RunRecord>> = (0..cfg.repetitions())
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed(cfg.seed, Domain::Repetition, r as u64);
            let pop = generate_population(&params, rep_seed)?;
            let mask = active_mask(&cfg.active, cfg.n, rep_seed);
            let inst = ThresholdInstance::from_budgets(
                t,
                mask,
                &pop.budgets,
                partial_sensitivity(cfg.query_kind())?,
            )?;
            mechanisms
                .iter()
                .enumerate()
                .map(|(m, &kind)| {
                    let seed = derive_seed(rep_seed, Domain::Mechanism, m as u64);
                    let (total_variance, rmse) = match cfg.query {
                        QueryName::Count => count_trial(kind, &pop, &inst, seed)?,
                        QueryName::Regression => {
                            regression_trial(kind, &pop, &inst, cfg.folds, seed)?
                        }
                    };
                    Ok(RunRecord {
                        repetition: r,
                        mechanism: kind,
                        active_count: inst.active_count(),
                        total_variance,
                        rmse,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let runs: Vec<RunRecord> = per_rep.into_iter().flatten().collect();

    let summaries = mechanisms
        .iter()
        .map(|&kind| {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| r.mechanism == kind)
                .map(|r| r.rmse)
                .collect();
            let rmse = match cfg.query {
                QueryName::Count => evaluate_rmse(&values)?,
                QueryName::Regression => values.iter().sum::<f64>() / values.len() as f64,
            };
            Ok(SummaryRecord {
                mechanism: kind,
                repetitions: values.len(),
                rmse,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ExperimentReport {
        query: cfg.query,
        n: cfg.n,
        t,
        runs,
        summaries,
    })
}

fn allocation_for(kind: MechanismKind, inst: &ThresholdInstance) -> Option<Allocation> {
    match kind {
        MechanismKind::Threshold => Some(allocate(inst)),
        MechanismKind::NonThreshold => Some(baseline_non_threshold(inst)),
        MechanismKind::Uniform => Some(baseline_tmdp(inst)),
        _ => None,
    }
}

fn count_trial(
    kind: MechanismKind,
    pop: &Population,
    inst: &ThresholdInstance,
    seed: u64,
) -> Result<(Option<f64>, f64)> {
    let truth = pop.true_count().expect("count population");
    if let Some(alloc) = allocation_for(kind, inst) {
        let run = run_mechanism(inst, &alloc, &[truth], seed)?;
        return Ok((Some(alloc.total), run.error()[0].abs()));
    }
    Ok(match kind {
        MechanismKind::Centralized => {
            let v = baseline_min_centralized(inst);
            let run = run_centralized(v, inst.active_mask(), &[truth], seed)?;
            (Some(v), run.error()[0].abs())
        }
        MechanismKind::Sample => (None, (baseline_sample(pop, seed)? - truth).abs()),
        MechanismKind::RandomizedResponse => (
            None,
            (baseline_randomized_response(pop, seed)? - truth).abs(),
        ),
        _ => (Some(0.0), 0.0),
    })
}

fn regression_trial(
    kind: MechanismKind,
    pop: &Population,
    inst: &ThresholdInstance,
    folds: usize,
    seed: u64,
) -> Result<(Option<f64>, f64)> {
    let PartyData::Regression {
        features,
        labels,
        dims,
        ..
    } = &pop.data
    else {
        unreachable!("regression population");
    };
    let d = *dims;
    let parts = fold_assignment(pop.n(), folds, seed)?;
    let alloc = allocation_for(kind, inst);
    let total_variance = match kind {
        MechanismKind::Centralized => Some(baseline_min_centralized(inst)),
        MechanismKind::NonPrivate => Some(0.0),
        _ => alloc.as_ref().map(|a| a.total),
    };

    let mut squared = 0.0;
    for (k, test) in parts.iter().enumerate() {
        let fold_seed = derive_seed(seed, Domain::Folds, k as u64 + 1);
        let train: Vec<usize> = (0..pop.n())
            .filter(|i| test.binary_search(i).is_err())
            .collect();
        let weights = match (kind, &alloc) {
            (_, Some(alloc)) => {
                let stats = sufficient_statistics(features, labels, d, train.iter().copied());
                let run = run_mechanism(inst, alloc, &stats, fold_seed)?;
                solve_weights(&run.released_output, d, alloc.total.sqrt())?
            }
            (MechanismKind::Sample, None) => baseline_sample_regression(pop, &train, fold_seed)?,
            _ => {
                let sigma = total_variance.unwrap_or(0.0).sqrt();
                functional_linreg(features, labels, d, train.iter().copied(), sigma, fold_seed)?
            }
        };
        let rmse = prediction_rmse(features, labels, d, &weights, test)?;
        squared += rmse * rmse * test.len() as f64;
    }
    Ok((total_variance, (squared / pop.n() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(query: QueryName) -> ExperimentConfig {
        ExperimentConfig {
            query,
            n: 60,
            repetitions: Some(6),
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn count_experiment_shape_and_control() {
        let report = run_experiment(&small(QueryName::Count)).unwrap();
        assert_eq!(report.t, 30);
        assert_eq!(report.runs.len(), 6 * 7);
        assert_eq!(report.summaries.len(), 7);
        for r in report
            .runs
            .iter()
            .filter(|r| r.mechanism == MechanismKind::NonPrivate)
        {
            assert_eq!(r.rmse, 0.0);
        }
        let order: Vec<usize> = report.runs.iter().map(|r| r.repetition).collect();
        assert!(order.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn experiments_are_deterministic() {
        for q in [QueryName::Count, QueryName::Regression] {
            let cfg = small(q);
            assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
        }
    }

    #[test]
    fn variance_ordering_in_records() {
        let report = run_experiment(&small(QueryName::Count)).unwrap();
        for rep in 0..6 {
            let v = |k| {
                report
                    .runs
                    .iter()
                    .find(|r| r.repetition == rep && r.mechanism == k)
                    .and_then(|r| r.total_variance)
                    .unwrap()
            };
            assert!(v(MechanismKind::Centralized) <= v(MechanismKind::Threshold) * (1.0 + 1e-12));
            assert!(v(MechanismKind::Threshold) <= v(MechanismKind::Uniform) * (1.0 + 1e-12));
            assert!(v(MechanismKind::Threshold) <= v(MechanismKind::NonThreshold) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn regression_control_has_small_error() {
        let mut cfg = small(QueryName::Regression);
        cfg.n = 400;
        cfg.repetitions = Some(2);
        let report = run_experiment(&cfg).unwrap();
        let control = report
            .summaries
            .iter()
            .find(|s| s.mechanism == MechanismKind::NonPrivate)
            .unwrap();
        assert!(control.rmse < 0.2, "{}", control.rmse);
    }

    #[test]
    fn active_masks() {
        assert_eq!(
            active_mask(&ActiveSpec::Explicit(vec![0, 2]), 3, 0),
            vec![true, false, true]
        );
        let mask = active_mask(&ActiveSpec::Random(RandomActive { random: 4 }), 10, 3);
        assert_eq!(mask.iter().filter(|&&a| a).count(), 4);
    }
}
