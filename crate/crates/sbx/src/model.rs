//! Self-contained feature extractor: network plus the preprocessing needed
//! to go from raw linear-power spectra to bottleneck features and back.
//!
//! Model files carry a text header (key-value lines, floats written in
//! Rust's shortest round-trip decimal form) followed by a binary section
//! with every layer's `w`, `b`, `b_dec` as little-endian f64. Save-then-load
//! reproduces the model bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dae::{Activation, LayerParams, Network};
use crate::error::{Error, Result};
use crate::io::{read_f64_vec, write_f64_slice};
use crate::linalg::Matrix;
use crate::spectral::{GcnStats, WarpKind, WarpSpec};

const MODEL_MAGIC: &str = "SBXMODEL";
const MODEL_VERSION: u32 = 1;

/// Name of the generator whose streams drive initialization, shuffling, and
/// masking; recorded in every model header.
pub const RNG_NAME: &str = "xoshiro256** seeded via splitmix64";

/// A trained network bundled with its preprocessing (frequency warp and
/// global contrast normalization) and informational metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    pub net: Network,
    pub gcn: GcnStats,
    pub warp: WarpSpec,
    /// Informational single-line entries (seeds, hyperparameters) carried in
    /// the header; order is preserved in the file.
    pub meta: Vec<(String, String)>,
}

impl SpectralModel {
    pub fn new(net: Network, gcn: GcnStats, warp: WarpSpec) -> Result<Self> {
        if warp.n_bins() != net.input_dim() {
            return Err(Error::shape(
                "SpectralModel::new",
                format!("warp over {} bins", warp.n_bins()),
                format!("network input dim {}", net.input_dim()),
            ));
        }
        Ok(SpectralModel {
            net,
            gcn,
            warp,
            meta: Vec::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: String) -> Result<Self> {
        if value.contains('\n') || key.contains(['\n', '=', ' ']) {
            return Err(Error::InvalidArg(format!("bad meta entry `{key}`")));
        }
        self.meta.push((key.to_string(), value));
        Ok(self)
    }

    pub fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    pub fn bottleneck_dim(&self) -> usize {
        self.net.bottleneck_dim()
    }

    /// Linear-power frames -> the network's training domain
    /// (warped log, contrast-normalized).
    pub fn preprocess(&self, frames: &Matrix) -> Result<Matrix> {
        let warped = self.warp.apply_batch(frames)?;
        Ok(self.gcn.apply_batch(&warped))
    }

    /// Linear-power frames -> bottleneck features, one row per frame.
    pub fn encode_frames(&self, frames: &Matrix) -> Result<Matrix> {
        let pre = self.preprocess(frames)?;
        self.net.encode_batch(&pre)
    }

    /// Linear-power frames -> reconstructed warped log spectra (GCN undone).
    pub fn reconstruct_warped_log(&self, frames: &Matrix) -> Result<Matrix> {
        let pre = self.preprocess(frames)?;
        let recon = self.net.reconstruct_batch(&pre)?;
        Ok(self.gcn.invert_batch(&recon))
    }

    /// Linear-power frames -> reconstructed linear power on the warped
    /// frequency axis (exp of [`reconstruct_warped_log`]).
    pub fn reconstruct_linear(&self, frames: &Matrix) -> Result<Matrix> {
        let mut out = self.reconstruct_warped_log(frames)?;
        for v in out.data_mut() {
            *v = v.exp();
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{MODEL_MAGIC} {MODEL_VERSION}")?;
        let dims: Vec<String> = self.net.dims().iter().map(ToString::to_string).collect();
        writeln!(w, "dims = {}", dims.join(" "))?;
        let enc: Vec<&str> = self.net.layers().iter().map(|l| l.enc_act.name()).collect();
        let dec: Vec<&str> = self.net.layers().iter().map(|l| l.dec_act.name()).collect();
        writeln!(w, "enc_act = {}", enc.join(" "))?;
        writeln!(w, "dec_act = {}", dec.join(" "))?;
        writeln!(w, "gcn_mean = {}", self.gcn.mean)?;
        writeln!(w, "gcn_scale = {}", self.gcn.scale)?;
        writeln!(w, "gcn_k_range = {}", self.gcn.k_range)?;
        writeln!(w, "warp_kind = {}", self.warp.kind().name())?;
        writeln!(w, "warp_bins = {}", self.warp.n_bins())?;
        writeln!(w, "warp_sample_rate = {}", self.warp.sample_rate())?;
        writeln!(w, "rng = {RNG_NAME}")?;
        for (k, v) in &self.meta {
            writeln!(w, "meta.{k} = {v}")?;
        }
        writeln!(w, "end_header")?;
        for layer in self.net.layers() {
            write_f64_slice(&mut w, layer.w.data())?;
            write_f64_slice(&mut w, &layer.b)?;
            write_f64_slice(&mut w, &layer.b_dec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut header = HeaderReader::new(&mut r, path);
        let first = header.next_line()?;
        let mut parts = first.split_whitespace();
        if parts.next() != Some(MODEL_MAGIC) {
            return Err(Error::Parse(format!(
                "{}: bad magic, not a model file",
                path.display()
            )));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("{}: missing version", path.display())))?;
        if version != MODEL_VERSION {
            return Err(Error::Parse(format!(
                "{}: unsupported model version {version}",
                path.display()
            )));
        }

        let mut dims: Option<Vec<usize>> = None;
        let mut enc_acts: Option<Vec<Activation>> = None;
        let mut dec_acts: Option<Vec<Activation>> = None;
        let mut gcn_mean: Option<f64> = None;
        let mut gcn_scale: Option<f64> = None;
        let mut gcn_k_range: Option<f64> = None;
        let mut warp_kind: Option<WarpKind> = None;
        let mut warp_bins: Option<usize> = None;
        let mut warp_rate: Option<f64> = None;
        let mut meta: Vec<(String, String)> = Vec::new();

        loop {
            let line = header.next_line()?;
            if line == "end_header" {
                break;
            }
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Parse(format!("{}: bad header line `{line}`", path.display())))?;
            match key {
                "dims" => dims = Some(parse_list(value, path, "dims")?),
                "enc_act" => enc_acts = Some(parse_acts(value)?),
                "dec_act" => dec_acts = Some(parse_acts(value)?),
                "gcn_mean" => gcn_mean = Some(parse_f64(value, path, key)?),
                "gcn_scale" => gcn_scale = Some(parse_f64(value, path, key)?),
                "gcn_k_range" => gcn_k_range = Some(parse_f64(value, path, key)?),
                "warp_kind" => warp_kind = Some(WarpKind::parse(value)?),
                "warp_bins" => warp_bins = Some(parse_usize(value, path, key)?),
                "warp_sample_rate" => warp_rate = Some(parse_f64(value, path, key)?),
                "rng" => {} // informational
                other => {
                    if let Some(mk) = other.strip_prefix("meta.") {
                        meta.push((mk.to_string(), value.to_string()));
                    } else {
                        return Err(Error::Parse(format!(
                            "{}: unknown header key `{other}`",
                            path.display()
                        )));
                    }
                }
            }
        }

        let dims = dims.ok_or_else(|| missing(path, "dims"))?;
        if dims.len() < 2 {
            return Err(Error::Parse(format!("{}: dims too short", path.display())));
        }
        let n_layers = dims.len() - 1;
        let enc_acts = enc_acts.ok_or_else(|| missing(path, "enc_act"))?;
        let dec_acts = dec_acts.ok_or_else(|| missing(path, "dec_act"))?;
        if enc_acts.len() != n_layers || dec_acts.len() != n_layers {
            return Err(Error::Parse(format!(
                "{}: activation counts do not match dims",
                path.display()
            )));
        }
        let gcn = GcnStats {
            mean: gcn_mean.ok_or_else(|| missing(path, "gcn_mean"))?,
            scale: gcn_scale.ok_or_else(|| missing(path, "gcn_scale"))?,
            k_range: gcn_k_range.ok_or_else(|| missing(path, "gcn_k_range"))?,
        };
        let warp = WarpSpec::new(
            warp_bins.ok_or_else(|| missing(path, "warp_bins"))?,
            warp_rate.ok_or_else(|| missing(path, "warp_sample_rate"))?,
            warp_kind.ok_or_else(|| missing(path, "warp_kind"))?,
        )?;

        let mut layers = Vec::with_capacity(n_layers);
        for k in 0..n_layers {
            let (n_in, n_out) = (dims[k], dims[k + 1]);
            let w_data = read_f64_vec(&mut r, n_out * n_in)
                .map_err(|_| Error::Parse(format!("{}: truncated weights", path.display())))?;
            let b = read_f64_vec(&mut r, n_out)
                .map_err(|_| Error::Parse(format!("{}: truncated biases", path.display())))?;
            let b_dec = read_f64_vec(&mut r, n_in)
                .map_err(|_| Error::Parse(format!("{}: truncated decoder biases", path.display())))?;
            layers.push(LayerParams::new(
                Matrix::from_vec(n_out, n_in, w_data)?,
                b,
                b_dec,
                enc_acts[k],
                dec_acts[k],
            )?);
        }
        let mut trailing = Vec::new();
        r.read_to_end(&mut trailing)?;
        if !trailing.is_empty() {
            return Err(Error::Parse(format!(
                "{}: {} unexpected trailing bytes (header dims inconsistent with payload)",
                path.display(),
                trailing.len()
            )));
        }

        let mut model = SpectralModel::new(Network::new(layers)?, gcn, warp)?;
        model.meta = meta;
        Ok(model)
    }
}

fn missing(path: &Path, key: &str) -> Error {
    Error::Parse(format!("{}: missing header key `{key}`", path.display()))
}

fn parse_f64(value: &str, path: &Path, key: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("{}: bad float for `{key}`: `{value}`", path.display())))
}

fn parse_usize(value: &str, path: &Path, key: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("{}: bad count for `{key}`: `{value}`", path.display())))
}

fn parse_list(value: &str, path: &Path, key: &str) -> Result<Vec<usize>> {
    value
        .split_whitespace()
        .map(|v| parse_usize(v, path, key))
        .collect()
}

fn parse_acts(value: &str) -> Result<Vec<Activation>> {
    value.split_whitespace().map(Activation::parse).collect()
}

/// Reads header lines byte-by-byte so the binary section stays untouched
/// in the underlying reader.
struct HeaderReader<'a, R: Read> {
    inner: &'a mut R,
    path: std::path::PathBuf,
}

impl<'a, R: Read> HeaderReader<'a, R> {
    fn new(inner: &'a mut R, path: &Path) -> Self {
        HeaderReader {
            inner,
            path: path.to_path_buf(),
        }
    }

    fn next_line(&mut self) -> Result<String> {
        let mut bytes = Vec::new();
        loop {
            let mut b = [0u8; 1];
            if self.inner.read(&mut b)? == 0 {
                return Err(Error::Parse(format!(
                    "{}: header ended before end_header",
                    self.path.display()
                )));
            }
            if b[0] == b'\n' {
                break;
            }
            bytes.push(b[0]);
            if bytes.len() > 1 << 16 {
                return Err(Error::Parse(format!(
                    "{}: unterminated header line",
                    self.path.display()
                )));
            }
        }
        String::from_utf8(bytes)
            .map_err(|_| Error::Parse(format!("{}: non-utf8 header", self.path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use crate::train::{pretrain_stack, Hyperparams, LayerSpec};

    fn small_model() -> SpectralModel {
        let frames = synth::synthetic_corpus(100, 60, 16);
        let warp = WarpSpec::new(16, 48000.0, WarpKind::None).unwrap();
        let warped = warp.apply_batch(&frames).unwrap();
        let gcn = GcnStats::fit(&warped).unwrap();
        let train = gcn.apply_batch(&warped);
        let specs = vec![
            LayerSpec::new(Hyperparams::new(0.1, 0.5, 10, 1).with_epochs(10, 10)),
            LayerSpec::new(Hyperparams::new(0.1, 0.5, 10, 2).with_epochs(10, 10)),
        ];
        let (net, _) = pretrain_stack(&train, &train, &[16, 8, 4], &specs).unwrap();
        SpectralModel::new(net, gcn, warp)
            .unwrap()
            .with_meta("seeds", "1 2".into())
            .unwrap()
    }

    #[test]
    fn save_load_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.sbxm");
        let model = small_model();
        model.save(&path).unwrap();
        let back = SpectralModel::load(&path).unwrap();
        assert_eq!(model, back);
        // saving the loaded model reproduces the same bytes
        let path2 = dir.path().join("model2.sbxm");
        back.save(&path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn encode_and_reconstruct_shapes() {
        let model = small_model();
        let frames = synth::synthetic_corpus(101, 5, 16);
        let features = model.encode_frames(&frames).unwrap();
        assert_eq!(features.shape(), (5, 4));
        let recon = model.reconstruct_linear(&frames).unwrap();
        assert_eq!(recon.shape(), (5, 16));
        assert!(recon.data().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn load_rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.sbxm");
        let model = small_model();
        model.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(SpectralModel::load(&path).is_err());
    }

    #[test]
    fn load_rejects_trailing_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.sbxm");
        let model = small_model();
        model.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.extend_from_slice(&[0u8; 8]);
        std::fs::write(&path, &bytes).unwrap();
        assert!(SpectralModel::load(&path).is_err());
    }

    #[test]
    fn rejects_warp_network_mismatch() {
        let model = small_model();
        let warp = WarpSpec::new(8, 48000.0, WarpKind::None).unwrap();
        assert!(SpectralModel::new(model.net, model.gcn, warp).is_err());
    }
}
