//! Seeded random deduction systems for property tests and benchmarks.

use rand::seq::index::sample;
use rand::Rng;

use crate::system::{DeductionSystem, DirectedRule, PropId, SymmetricRule};

/// A valid system with `n` propositions and `m` rules, each rule symmetric
/// (2 to 4 members) or directed (1 to 3 premises) with equal odds.
pub fn random_system<R: Rng>(rng: &mut R, n: usize, m: usize) -> DeductionSystem {
    let mut sys = DeductionSystem::new((0..n).map(|i| format!("p{i}")));
    if n < 2 {
        return sys;
    }
    for _ in 0..m {
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(2..=n.min(4));
            let members = sample(rng, n, k).into_iter().map(PropId).collect();
            sys.push_symmetric(SymmetricRule::new(members));
        } else {
            let k = rng.gen_range(1..=(n - 1).min(3));
            let picked: Vec<PropId> = sample(rng, n, k + 1).into_iter().map(PropId).collect();
            sys.push_directed(DirectedRule::new(picked[1..].iter().copied(), picked[0]));
        }
    }
    sys
}

/// Random size in `2..=max_n` and rule count in `0..=max_m`.
pub fn random_small_system<R: Rng>(rng: &mut R, max_n: usize, max_m: usize) -> DeductionSystem {
    let n = rng.gen_range(2..=max_n.max(2));
    let m = rng.gen_range(0..=max_m);
    random_system(rng, n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_systems_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_small_system(&mut rng, 10, 16);
            assert!(s.is_valid(), "{:?}", s.validate());
            assert!(s.len() <= 10 && s.rule_count() <= 16);
        }
    }

    #[test]
    fn same_seed_same_system() {
        let a = random_system(&mut ChaCha8Rng::seed_from_u64(3), 8, 12);
        let b = random_system(&mut ChaCha8Rng::seed_from_u64(3), 8, 12);
        assert_eq!(a, b);
    }
}
