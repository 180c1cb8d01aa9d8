//! Shared inputs for the benchmarks.

use mindeduce::random::random_system;
use mindeduce::DeductionSystem;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded random systems of `n` propositions and `m` rules.
pub fn random_systems(count: usize, n: usize, m: usize) -> Vec<DeductionSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..count).map(|_| random_system(&mut rng, n, m)).collect()
}

pub const SNOW_GUESS: [&str; 9] = ["R_4", "R_5", "R_6", "R_7", "R_8", "R_9", "R_10", "R_11", "R_12"];
