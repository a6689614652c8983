//! Linear regression through perturbed sufficient statistics.
//!
//! The released vector holds the upper triangle of `D'D` (row-major) followed by
//! `2 D'Y`. Both are sums of per-party terms, so the distributed mechanism can
//! perturb them like any other summed query. Weights are recovered as
//! `w = (D'D + X1 + 4 sigma I)^{-1} (D'Y + X2)`, pure post-processing.

use nalgebra::{DMatrix, DVector};

use super::rng::{stream_rng, Domain};
use crate::error::{Error, Result};
use rand_distr::{Distribution, StandardNormal};

/// Length of the released statistics vector for `dims` features.
pub fn statistics_len(dims: usize) -> usize {
    dims * (dims + 1) / 2 + dims
}

/// Sufficient statistics of the rows listed in `rows`.
pub fn sufficient_statistics(
    features: &[f64],
    labels: &[f64],
    dims: usize,
    rows: impl IntoIterator<Item = usize>,
) -> Vec<f64> {
    let tri = dims * (dims + 1) / 2;
    let mut stats = vec![0.0; statistics_len(dims)];
    for r in rows {
        let x = &features[r * dims..(r + 1) * dims];
        let mut k = 0;
        for i in 0..dims {
            for j in i..dims {
                stats[k] += x[i] * x[j];
                k += 1;
            }
        }
        for i in 0..dims {
            stats[tri + i] += 2.0 * x[i] * labels[r];
        }
    }
    stats
}

/// Solves for the weights from (possibly perturbed) statistics; `sigma` is the
/// standard deviation of the noise on each coordinate.
pub fn solve_weights(stats: &[f64], dims: usize, sigma: f64) -> Result<Vec<f64>> {
    if stats.len() != statistics_len(dims) {
        return Err(Error::DimensionMismatch {
            expected: statistics_len(dims),
            actual: stats.len(),
        });
    }
    let tri = dims * (dims + 1) / 2;
    let mut moment = DMatrix::<f64>::zeros(dims, dims);
    let mut k = 0;
    for i in 0..dims {
        for j in i..dims {
            moment[(i, j)] = stats[k];
            moment[(j, i)] = stats[k];
            k += 1;
        }
        moment[(i, i)] += 4.0 * sigma;
    }
    let rhs = DVector::from_iterator(dims, stats[tri..].iter().map(|v| v / 2.0));
    let w = moment.lu().solve(&rhs).ok_or(Error::Singular)?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(w.iter().copied().collect())
}

/// Centralized release: perturbs the statistics of `rows` with `N(0, sigma^2)` per
/// coordinate and solves for the weights.
pub fn functional_linreg(
    features: &[f64],
    labels: &[f64],
    dims: usize,
    rows: impl IntoIterator<Item = usize>,
    sigma: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidSigma(sigma));
    }
    let mut stats = sufficient_statistics(features, labels, dims, rows);
    let mut rng = stream_rng(seed, Domain::CentralNoise, 0);
    for s in &mut stats {
        let z: f64 = StandardNormal.sample(&mut rng);
        *s += sigma * z;
    }
    solve_weights(&stats, dims, sigma)
}

/// Root mean squared prediction error of `weights` on `rows`.
pub fn prediction_rmse(
    features: &[f64],
    labels: &[f64],
    dims: usize,
    weights: &[f64],
    rows: &[usize],
) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Empty("evaluation rows"));
    }
    let sq: f64 = rows
        .iter()
        .map(|&r| {
            let x = &features[r * dims..(r + 1) * dims];
            let pred: f64 = x.iter().zip(weights).map(|(a, b)| a * b).sum();
            (labels[r] - pred).powi(2)
        })
        .sum();
    Ok((sq / rows.len() as f64).sqrt())
}
