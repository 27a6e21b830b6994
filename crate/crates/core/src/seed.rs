//! Per-trial seed derivation.
//!
//! Every random draw in a run is keyed by `(run seed, stream name, indices...)`
//! through a fixed 64-bit avalanche mix, so trials can be evaluated in any
//! order, on any number of threads, and still see identical randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every trial.
pub type TrialRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a of a stream name.
pub fn hash_name(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Folds `seed`, the stream name and a list of indices into one 64-bit seed.
pub fn derive(seed: u64, name: &str, indices: &[u64]) -> u64 {
    let mut h = mix64(seed ^ mix64(hash_name(name)));
    for &i in indices {
        h = mix64(h ^ mix64(i.wrapping_add(0x6A09_E667_F3BC_C909)));
    }
    h
}

pub fn trial_rng(seed: u64, name: &str, indices: &[u64]) -> TrialRng {
    TrialRng::seed_from_u64(derive(seed, name, indices))
}
