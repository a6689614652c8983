//! Instance generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tpmdp_core::ThresholdInstance;

/// Instance with `n` parties, threshold `n / 2` and requirements uniform on `[0.5, 5]`.
/// Parties are active with probability `active_frac`.
pub fn random_instance(n: usize, active_frac: f64, seed: u64) -> ThresholdInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    let sg: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5.0)).collect();
    let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(active_frac)).collect();
    ThresholdInstance::from_mask((n / 2).min(n.saturating_sub(1)), mask, sg)
        .expect("generated instance is valid")
}
