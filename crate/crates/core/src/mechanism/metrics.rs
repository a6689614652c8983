//! Error summaries.

use super::rng::{stream_rng, Domain};
use crate::error::{Error, Result};
use rand::seq::SliceRandom;

/// `sqrt(mean(e^2))` over the given errors.
pub fn evaluate_rmse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::Empty("errors"));
    }
    Ok((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}

/// Shuffled partition of `0..n` into `folds` nearly equal parts.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n {
        return Err(Error::InvalidConfig(format!(
            "cannot split {n} records into {folds} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, Domain::Folds, 0));
    let mut parts = vec![Vec::new(); folds];
    for (k, i) in order.into_iter().enumerate() {
        parts[k % folds].push(i);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(evaluate_rmse(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(evaluate_rmse(&[-3.0]).unwrap(), 3.0);
        assert_eq!(evaluate_rmse(&[3.0, 4.0]).unwrap(), (12.5f64).sqrt());
        assert!(evaluate_rmse(&[]).is_err());
    }

    #[test]
    fn folds_partition_every_record() {
        let parts = fold_assignment(23, 5, 1).unwrap();
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(parts.iter().all(|p| p.len() == 4 || p.len() == 5));
        assert_eq!(parts, fold_assignment(23, 5, 1).unwrap());
        assert!(fold_assignment(3, 5, 0).is_err());
    }
}
