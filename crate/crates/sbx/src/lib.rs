//! # sbx — spectral bottleneck extraction
//!
//! Tied-weight deep denoising auto-encoders for compressing high-dimensional
//! log-spectral frames into low-dimensional bottleneck features, with a
//! cepstral-truncation (DCT) baseline and distortion metrics to compare
//! against.
//!
//! The pieces:
//!
//! - [`linalg`] / [`rng`] — dense `f64` matrices with bit-deterministic
//!   reductions, and a seeded xoshiro256** generator (SplitMix64 seeding).
//! - [`dae`] — tied-weight layers and stacked networks: the decoder weight
//!   is always the transpose of the current encoder weight.
//! - [`corrupt`] — Bernoulli masking noise for denoising training.
//! - [`train`] — analytic backpropagation through the tied stack, momentum
//!   SGD, greedy layer-wise pretraining, fine-tuning, early stopping.
//! - [`spectral`] — Bark-scale frequency warping, global contrast
//!   normalization, truncated-DCT cepstra, log-spectral distortion.
//! - [`synth`] — deterministic synthetic spectral corpora for desk-scale
//!   experiments.
//! - [`model`] / [`io`] / [`config`] / [`commands`] — self-contained model
//!   files, binary frame files, TOML configs, and the drivers behind the
//!   `sbx` command-line tool.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example end_to_end        # synth -> train -> encode -> eval
//! cargo run --release --example gradient_check    # analytic vs finite-difference grads
//! cargo run --release --example greedy_pretraining
//! cargo run --release --example masking_noise
//! cargo run --release --example depth_sweep
//! cargo run --release --example dct_baseline
//! ```
//!
//! ## Determinism
//!
//! Every random draw comes from xoshiro256** seeded via SplitMix64 from
//! 64-bit seeds recorded in configs and model headers. Reductions run in a
//! fixed order, so identical inputs and seeds reproduce identical models,
//! byte for byte.

pub mod commands;
pub mod config;
pub mod corrupt;
pub mod dae;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod spectral;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
