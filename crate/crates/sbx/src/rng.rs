//! Seeded random number generation.
//!
//! The generator is xoshiro256** (Blackman & Vigna), with its 256-bit state
//! filled from the 64-bit seed by SplitMix64. Both algorithms are publicly
//! documented and the value streams here are part of this crate's
//! reproducibility contract: the same seed yields the same stream, bit for
//! bit, on every platform and in every future version.

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

/// One SplitMix64 output step.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed.
///
/// Defined as the SplitMix64 mix of `base ^ ((stream + 1) * GOLDEN)`; part of
/// the reproducibility contract (training uses streams 0..2 for weight
/// initialization, shuffling, and masking).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut s = base ^ stream.wrapping_add(1).wrapping_mul(GOLDEN);
    splitmix64(&mut s)
}

/// Deterministic xoshiro256** generator with a 64-bit seed.
#[derive(Clone, Debug)]
pub struct SeededRng {
    s: [u64; 4],
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut sm);
        }
        SeededRng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `count` samples uniform in `[lo, hi)`.
    pub fn uniform_vec(&mut self, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
        if !(lo < hi) {
            return Err(Error::InvalidArg(format!(
                "uniform bounds must satisfy lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok((0..count).map(|_| lo + (hi - lo) * self.next_f64()).collect())
    }

    /// `count` samples in `{0.0, 1.0}` with `P(1) = p`.
    pub fn bernoulli_vec(&mut self, p: f64, count: usize) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArg(format!(
                "bernoulli probability must be in [0, 1], got {p}"
            )));
        }
        Ok((0..count)
            .map(|_| if self.next_f64() < p { 1.0 } else { 0.0 })
            .collect())
    }

    /// Unbiased integer in `[0, n)` by rejection.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_mean_large_sample() {
        let mut rng = SeededRng::new(7);
        let xs = rng.uniform_vec(0.0, 1.0, 1_000_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn uniform_empty_and_bad_bounds() {
        let mut rng = SeededRng::new(1);
        assert!(rng.uniform_vec(0.0, 1.0, 0).unwrap().is_empty());
        assert!(rng.uniform_vec(1.0, 1.0, 3).is_err());
        assert!(rng.uniform_vec(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn bernoulli_endpoints() {
        let mut rng = SeededRng::new(3);
        assert!(rng.bernoulli_vec(0.0, 1000).unwrap().iter().all(|&v| v == 0.0));
        assert!(rng.bernoulli_vec(1.0, 1000).unwrap().iter().all(|&v| v == 1.0));
        assert!(rng.bernoulli_vec(-0.1, 1).is_err());
        assert!(rng.bernoulli_vec(1.1, 1).is_err());
    }

    #[test]
    fn bernoulli_concentration() {
        let mut rng = SeededRng::new(11);
        let xs = rng.bernoulli_vec(0.1, 1_000_000).unwrap();
        let frac = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((frac - 0.1).abs() < 0.001, "fraction {frac}");
    }

    #[test]
    fn shuffle_is_permutation_and_deterministic() {
        let mut a: Vec<u32> = (0..100).collect();
        let mut b: Vec<u32> = (0..100).collect();
        SeededRng::new(5).shuffle(&mut a);
        SeededRng::new(5).shuffle(&mut b);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn derived_streams_differ() {
        let s0 = derive_seed(123, 0);
        let s1 = derive_seed(123, 1);
        assert_ne!(s0, s1);
        assert_eq!(s0, derive_seed(123, 0));
    }
}
