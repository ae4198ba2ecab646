//! Reproducible seed derivation.
//!
//! Each series gets its own RNG stream seeded by `seed_for(master, index)`,
//! so series `i` is the same regardless of how many series are generated or
//! in which order they are computed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used for every stochastic step in the crate.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `master`.
pub fn seed_for(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master).wrapping_add(index))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the SplitMix64 generator seeded with 0 (state advances by the golden gamma).
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn child_seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..1000).map(|i| seed_for(42, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_eq!(seed_for(42, 7), seeds[7]);
        assert_ne!(seed_for(43, 7), seeds[7]);
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = rng_from_seed(5).random_iter().take(4).collect();
        let b: Vec<u64> = rng_from_seed(5).random_iter().take(4).collect();
        assert_eq!(a, b);
    }
}
