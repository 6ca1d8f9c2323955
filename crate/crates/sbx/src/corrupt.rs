//! Masking corruption for denoising training.
//!
//! Each input dimension is independently zeroed with probability `d`
//! (Bernoulli masking). Non-masked coordinates pass through bit-identically;
//! there is no rescaling. Corruption is a training-time device only: targets
//! stay clean, and nothing is masked at feature-extraction time.

use crate::error::Result;
use crate::linalg::Matrix;
use crate::rng::SeededRng;

/// Bernoulli masking noise source. Holds mutable RNG state, so a training
/// run should own exactly one instance.
#[derive(Clone, Debug)]
pub struct MaskingNoise {
    d: f64,
    rng: SeededRng,
}

impl MaskingNoise {
    pub fn new(d: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&d) {
            return Err(crate::error::Error::InvalidArg(format!(
                "masking probability must be in [0, 1], got {d}"
            )));
        }
        Ok(MaskingNoise {
            d,
            rng: SeededRng::new(seed),
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Fresh mask applied to `x`: each coordinate becomes 0.0 with
    /// probability `d`, otherwise stays untouched.
    pub fn corrupt(&mut self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&v| if self.rng.next_f64() < self.d { 0.0 } else { v })
            .collect()
    }

    /// Row-wise corruption with a fresh mask per row per call; masks are
    /// resampled on every presentation.
    pub fn corrupt_batch(&mut self, xs: &Matrix) -> Matrix {
        let mut out = xs.clone();
        for r in 0..out.rows() {
            let masked = self.corrupt(xs.row(r));
            out.row_mut(r).copy_from_slice(&masked);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = SeededRng::new(seed);
        Matrix::from_vec(rows, cols, rng.uniform_vec(-1.0, 1.0, rows * cols).unwrap()).unwrap()
    }

    #[test]
    fn d_zero_is_identity() {
        let xs = frames(20, 16, 1);
        let mut noise = MaskingNoise::new(0.0, 9).unwrap();
        assert_eq!(noise.corrupt_batch(&xs), xs);
    }

    #[test]
    fn d_one_zeroes_everything() {
        let mut noise = MaskingNoise::new(1.0, 9).unwrap();
        let out = noise.corrupt(&[1.0, -2.0, 3.0]);
        assert_eq!(out, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn same_state_same_mask() {
        let xs = frames(10, 32, 2);
        let mut a = MaskingNoise::new(0.3, 77).unwrap();
        let mut b = MaskingNoise::new(0.3, 77).unwrap();
        assert_eq!(a.corrupt_batch(&xs), b.corrupt_batch(&xs));
    }

    #[test]
    fn successive_calls_resample_mask() {
        let xs = frames(50, 64, 3);
        let mut noise = MaskingNoise::new(0.3, 5).unwrap();
        let first = noise.corrupt_batch(&xs);
        let second = noise.corrupt_batch(&xs);
        assert_ne!(first, second);
    }

    #[test]
    fn unmasked_coordinates_bit_identical() {
        let xs = frames(10, 100, 4);
        let mut noise = MaskingNoise::new(0.5, 6).unwrap();
        let out = noise.corrupt_batch(&xs);
        for r in 0..xs.rows() {
            for c in 0..xs.cols() {
                let v = out.get(r, c);
                assert!(v == 0.0 || v.to_bits() == xs.get(r, c).to_bits());
            }
        }
    }

    #[test]
    fn masked_fraction_concentrates() {
        let xs = frames(1000, 1000, 7);
        let mut noise = MaskingNoise::new(0.1, 8).unwrap();
        let out = noise.corrupt_batch(&xs);
        let masked = out
            .data()
            .iter()
            .zip(xs.data())
            .filter(|(o, x)| **o == 0.0 && **x != 0.0)
            .count();
        let frac = masked as f64 / xs.data().len() as f64;
        assert!((frac - 0.1).abs() < 0.001, "masked fraction {frac}");
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(MaskingNoise::new(-0.01, 0).is_err());
        assert!(MaskingNoise::new(1.01, 0).is_err());
    }
}
