//! Training configuration files.
//!
//! Plain TOML with one `[[layer]]` block per pretraining layer plus a
//! `[finetune]` block. Per-block keys use the short names `lr` (learning
//! rate), `m` (momentum), `b` (batch size), `s` (seed), `d` (masking
//! probability, omitted for clean training), with optional `max_epochs`,
//! `patience`, `enc_act`, `dec_act`. Experiment runs add `[split]` and
//! `[experiment]` blocks.

use std::path::Path;

use serde::Deserialize;

use crate::dae::Activation;
use crate::error::{Error, Result};
use crate::spectral::{WarpKind, DEFAULT_K_RANGE};
use crate::train::{Hyperparams, LayerSpec, DEFAULT_MAX_EPOCHS, DEFAULT_PATIENCE};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Layer widths from input to bottleneck, e.g. `[2049, 500, 180, 120]`.
    pub dims: Vec<usize>,
    #[serde(default = "default_warp")]
    pub warp: String,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    #[serde(default = "default_k_range")]
    pub k_range: f64,
    #[serde(default, rename = "layer")]
    pub layers: Vec<HpBlock>,
    #[serde(default)]
    pub finetune: Option<HpBlock>,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub experiment: Option<ExperimentConfig>,
}

fn default_warp() -> String {
    "none".into()
}

fn default_sample_rate() -> f64 {
    48000.0
}

fn default_k_range() -> f64 {
    DEFAULT_K_RANGE
}

/// One hyperparameter block (a `[[layer]]` entry or `[finetune]`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpBlock {
    pub lr: f64,
    pub m: f64,
    pub b: usize,
    pub s: u64,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub max_epochs: Option<usize>,
    #[serde(default)]
    pub patience: Option<usize>,
    #[serde(default)]
    pub enc_act: Option<String>,
    #[serde(default)]
    pub dec_act: Option<String>,
}

impl HpBlock {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            lr: self.lr,
            momentum: self.m,
            batch_size: self.b,
            seed: self.s,
            mask_d: self.d,
            max_epochs: self.max_epochs.unwrap_or(DEFAULT_MAX_EPOCHS),
            patience: self.patience.unwrap_or(DEFAULT_PATIENCE),
        }
    }

    pub fn layer_spec(&self) -> Result<LayerSpec> {
        let enc_act = match &self.enc_act {
            Some(s) => Activation::parse(s)?,
            None => Activation::Tanh,
        };
        let dec_act = match &self.dec_act {
            Some(s) => Activation::parse(s)?,
            None => Activation::Tanh,
        };
        Ok(LayerSpec {
            hp: self.hyperparams(),
            enc_act,
            dec_act,
        })
    }
}

/// Train/valid/test fractions plus the shuffle seed for the split.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_train_frac")]
    pub train: f64,
    #[serde(default = "default_valid_frac")]
    pub valid: f64,
    #[serde(default = "default_test_frac")]
    pub test: f64,
    #[serde(default = "default_split_seed")]
    pub seed: u64,
}

fn default_train_frac() -> f64 {
    0.8
}

fn default_valid_frac() -> f64 {
    0.1
}

fn default_test_frac() -> f64 {
    0.1
}

fn default_split_seed() -> u64 {
    42
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
            seed: 42,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        let sum = self.train + self.valid + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArg(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        if self.train <= 0.0 || self.valid <= 0.0 || self.test < 0.0 {
            return Err(Error::InvalidArg(
                "train and valid fractions must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Settings for the depth-sweep and baseline experiments.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Run seeds; per-layer and finetune seeds are derived from each.
    pub seeds: Vec<u64>,
    /// Cepstral order for the baseline; must equal the bottleneck dim.
    #[serde(default)]
    pub cep_order: Option<usize>,
}

impl TrainConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let cfg: TrainConfig = toml::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 {
            return Err(Error::InvalidArg(format!(
                "config needs at least two dims, got {:?}",
                self.dims
            )));
        }
        if self.layers.len() != self.dims.len() - 1 {
            return Err(Error::InvalidArg(format!(
                "{} dims require {} [[layer]] blocks, got {}",
                self.dims.len(),
                self.dims.len() - 1,
                self.layers.len()
            )));
        }
        if let Some(ft) = &self.finetune {
            if ft.d.is_some() {
                return Err(Error::InvalidArg(
                    "finetune block must not set a masking probability d".into(),
                ));
            }
        }
        self.split.validate()?;
        if !(self.k_range > 0.0) {
            return Err(Error::InvalidArg("k_range must be positive".into()));
        }
        WarpKind::parse(&self.warp)?;
        for block in &self.layers {
            block.hyperparams().validate()?;
            block.layer_spec()?;
        }
        if let Some(ft) = &self.finetune {
            ft.hyperparams().validate()?;
        }
        Ok(())
    }

    pub fn warp_kind(&self) -> WarpKind {
        // validated in validate()
        WarpKind::parse(&self.warp).unwrap()
    }

    pub fn layer_specs(&self) -> Result<Vec<LayerSpec>> {
        self.layers.iter().map(HpBlock::layer_spec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TrainConfig> {
        let cfg: TrainConfig =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = parse(
            r#"
dims = [8, 4, 2]

[[layer]]
lr = 0.1
m = 0.5
b = 10
s = 1
d = 0.1

[[layer]]
lr = 0.1
m = 0.5
b = 10
s = 2

[finetune]
lr = 0.01
m = 0.9
b = 10
s = 3
"#,
        )
        .unwrap();
        assert_eq!(cfg.dims, vec![8, 4, 2]);
        assert_eq!(cfg.layers[0].d, Some(0.1));
        assert_eq!(cfg.layers[1].d, None);
        assert_eq!(cfg.split.train, 0.8);
        let hp = cfg.layers[0].hyperparams();
        assert_eq!(hp.max_epochs, DEFAULT_MAX_EPOCHS);
        assert_eq!(hp.patience, DEFAULT_PATIENCE);
    }

    #[test]
    fn rejects_layer_count_mismatch() {
        let err = parse(
            r#"
dims = [8, 4, 2]

[[layer]]
lr = 0.1
m = 0.5
b = 10
s = 1
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("[[layer]] blocks"));
    }

    #[test]
    fn rejects_masked_finetune() {
        let err = parse(
            r#"
dims = [8, 4]

[[layer]]
lr = 0.1
m = 0.5
b = 10
s = 1

[finetune]
lr = 0.01
m = 0.9
b = 10
s = 3
d = 0.1
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("finetune"));
    }

    #[test]
    fn rejects_bad_split() {
        let err = parse(
            r#"
dims = [8, 4]

[[layer]]
lr = 0.1
m = 0.5
b = 10
s = 1

[split]
train = 0.9
valid = 0.3
test = 0.1
"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sum to 1"));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(parse(
            r#"
dims = [8, 4]
bogus = 1

[[layer]]
lr = 0.1
m = 0.5
b = 10
s = 1
"#,
        )
        .is_err());
    }
}
