//! Seeded pseudo-random stream for the mutation engine.
//!
//! Every random decision the engine makes is drawn from ChaCha8 seeded
//! through `rand`'s `seed_from_u64`, so a `(program, spec)` pair always
//! produces the same variant.

use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SeededStream {
    rng: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// `k` distinct indices from `0..n`, ascending.
    pub fn choose_sites(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut picked = index::sample(&mut self.rng, n, k).into_vec();
        picked.sort_unstable();
        picked
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

/// Number of sites to transform out of `eligible` at the given intensity.
pub fn site_count(eligible: usize, intensity: f64) -> usize {
    ((eligible as f64) * intensity).round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededStream::new(7);
        let mut b = SeededStream::new(7);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_eq!(a.choose_sites(100, 10), b.choose_sites(100, 10));
        assert_ne!(SeededStream::new(1).next_u64(), SeededStream::new(2).next_u64());
    }

    #[test]
    fn frozen_first_outputs() {
        // Guards against a silent generator change between dependency
        // upgrades; corpora on disk depend on these values.
        let mut s = SeededStream::new(0);
        let first: Vec<u64> = (0..3).map(|_| s.next_u64()).collect();
        assert_eq!(first, FROZEN_SEED0);
    }

    const FROZEN_SEED0: [u64; 3] = [13080132717333068652, 8594738769458413623, 12896916468484187878];

    #[test]
    fn sites_are_sorted_and_distinct() {
        let mut s = SeededStream::new(3);
        let sites = s.choose_sites(20, 8);
        assert_eq!(sites.len(), 8);
        assert!(sites.windows(2).all(|w| w[0] < w[1]));
        assert!(sites.iter().all(|&i| i < 20));
        assert_eq!(s.choose_sites(3, 10).len(), 3);
    }

    #[test]
    fn site_counts() {
        assert_eq!(site_count(10, 0.0), 0);
        assert_eq!(site_count(10, 0.25), 3);
        assert_eq!(site_count(50, 3.0 / 50.0), 3);
        assert_eq!(site_count(7, 1.0), 7);
    }
}
