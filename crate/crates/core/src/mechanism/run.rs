//! The multi-party Gaussian mechanism with an ideal summation functionality.
//!
//! Every party draws its own zero-mean Gaussian vector with its allocated
//! variance. The noises are summed onto the true query output and the sum is
//! handed to active parties only; inactive parties learn nothing.

use rand_distr::{Distribution, StandardNormal};

use super::rng::{stream_rng, Domain};
use crate::allocator::{Allocation, ThresholdInstance};
use crate::error::{Error, Result};

/// What a party receives from one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartyOutput<'a> {
    Released(&'a [f64]),
    Bottom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismRun {
    pub true_output: Vec<f64>,
    pub released_output: Vec<f64>,
    /// One vector per noise source, in party order.
    pub noise_draws: Vec<Vec<f64>>,
    pub active: Vec<bool>,
    pub seed: u64,
}

impl MechanismRun {
    pub fn output_for(&self, party: usize) -> PartyOutput<'_> {
        if self.active[party] {
            PartyOutput::Released(&self.released_output)
        } else {
            PartyOutput::Bottom
        }
    }

    /// `released - true` per coordinate.
    pub fn error(&self) -> Vec<f64> {
        self.released_output
            .iter()
            .zip(&self.true_output)
            .map(|(r, t)| r - t)
            .collect()
    }
}

fn gaussian_vector(seed: u64, domain: Domain, index: u64, variance: f64, dims: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, domain, index);
    let sd = variance.sqrt();
    (0..dims)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect()
}

fn release(true_output: &[f64], noise_draws: &[Vec<f64>]) -> Vec<f64> {
    let mut out = true_output.to_vec();
    for draw in noise_draws {
        for (o, x) in out.iter_mut().zip(draw) {
            *o += x;
        }
    }
    out
}

/// One run of the distributed mechanism. Party `i` draws from the stream
/// `(seed, party noise, i)`.
pub fn run_mechanism(
    inst: &ThresholdInstance,
    alloc: &Allocation,
    true_output: &[f64],
    seed: u64,
) -> Result<MechanismRun> {
    if alloc.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            actual: alloc.len(),
        });
    }
    if true_output.is_empty() {
        return Err(Error::Empty("query output"));
    }
    let dims = true_output.len();
    let noise_draws: Vec<Vec<f64>> = alloc
        .variances
        .iter()
        .enumerate()
        .map(|(i, &v)| gaussian_vector(seed, Domain::PartyNoise, i as u64, v, dims))
        .collect();
    Ok(MechanismRun {
        true_output: true_output.to_vec(),
        released_output: release(true_output, &noise_draws),
        noise_draws,
        active: inst.active_mask().to_vec(),
        seed,
    })
}

/// A trusted curator adding a single Gaussian draw of the given variance; the
/// result goes to every party in `active`.
pub fn run_centralized(
    variance: f64,
    active: &[bool],
    true_output: &[f64],
    seed: u64,
) -> Result<MechanismRun> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::InvalidSigma(variance));
    }
    if true_output.is_empty() {
        return Err(Error::Empty("query output"));
    }
    let draw = gaussian_vector(seed, Domain::CentralNoise, 0, variance, true_output.len());
    let noise_draws = vec![draw];
    Ok(MechanismRun {
        true_output: true_output.to_vec(),
        released_output: release(true_output, &noise_draws),
        noise_draws,
        active: active.to_vec(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::allocate;

    #[test]
    fn zero_allocation_releases_truth() {
        let inst = ThresholdInstance::new(1, [0, 2], vec![1.0; 3]).unwrap();
        let run = run_mechanism(&inst, &Allocation::zeros(3), &[4.0, -1.5], 1).unwrap();
        assert_eq!(run.released_output, vec![4.0, -1.5]);
        assert_eq!(run.output_for(1), PartyOutput::Bottom);
        assert_eq!(run.output_for(2), PartyOutput::Released(&[4.0, -1.5]));
    }

    #[test]
    fn release_is_truth_plus_noise() {
        let inst = ThresholdInstance::all_active(2, vec![3.0, 2.0, 1.0, 1.0]).unwrap();
        let alloc = allocate(&inst);
        let run = run_mechanism(&inst, &alloc, &[10.0], 42).unwrap();
        let sum: f64 = run.noise_draws.iter().map(|d| d[0]).sum();
        assert_eq!(
            run.released_output[0],
            10.0 + run.noise_draws.iter().fold(0.0, |a, d| a + d[0])
        );
        assert!((run.error()[0] - sum).abs() < 1e-12);
        assert_eq!(run, run_mechanism(&inst, &alloc, &[10.0], 42).unwrap());
        assert_ne!(
            run.released_output,
            run_mechanism(&inst, &alloc, &[10.0], 43)
                .unwrap()
                .released_output
        );
    }

    #[test]
    fn mismatched_allocation_is_rejected() {
        let inst = ThresholdInstance::all_active(1, vec![1.0; 3]).unwrap();
        assert!(run_mechanism(&inst, &Allocation::zeros(2), &[0.0], 0).is_err());
        assert!(run_mechanism(&inst, &Allocation::zeros(3), &[], 0).is_err());
        assert!(run_centralized(-1.0, &[true], &[0.0], 0).is_err());
    }
}
