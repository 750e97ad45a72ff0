//! Seeded randomness for experiments and resampling.
//!
//! The generator is xoshiro256** (Blackman & Vigna) seeded through
//! SplitMix64, as implemented by `rand_xoshiro`. Bounded draws use the
//! rejection method below rather than any distribution code, so a seed
//! produces the same experiment on every platform and crate version.
//!
//! Test vector: `ExperimentRng::new(0)` yields `0x99ec5f36cb75f2b4`,
//! `0xbf6e1f784956452a`, `0x1a5f849d4933e6e0` as its first three words.

use alloc::vec::Vec;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Clone, Debug)]
pub struct ExperimentRng(Xoshiro256StarStar);

impl ExperimentRng {
    pub fn new(seed: u64) -> Self {
        ExperimentRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    /// Independent stream number `index` of `seed`: the base generator
    /// advanced by `index` jumps of 2^128 steps.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        for _ in 0..index {
            rng.jump();
        }
        ExperimentRng(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..bound`.
    ///
    /// # Panics
    /// If `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // reject the top partial block of 2^64 so every residue is equally likely
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    /// `k` distinct indices from `0..n`, uniformly, in draw order
    /// (partial Fisher–Yates).
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}
