//! Seed derivation.
//!
//! Every random draw comes from a ChaCha8 stream keyed by `(seed, domain)` with the
//! stream id set to an index (party, repetition, fold). Streams never overlap, so
//! work can be split across threads without changing any draw.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent purposes that consume randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Population = 1,
    PartyNoise = 2,
    CentralNoise = 3,
    Sampling = 4,
    RandomizedResponse = 5,
    ActiveSet = 6,
    Folds = 7,
    Repetition = 8,
    Mechanism = 9,
}

pub fn stream_rng(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Child seed for nested work items.
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    stream_rng(seed, domain, index).next_u64()
}
