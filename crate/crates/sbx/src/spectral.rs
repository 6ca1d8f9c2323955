//! Spectral preprocessing and metrics: Bark-scale frequency warping, global
//! contrast normalization, the truncated-DCT cepstral baseline, and
//! log-spectral distortion.
//!
//! Conventions used throughout:
//! - spectra arrive as linear-power frames (nonnegative bins);
//! - power bins are floored at [`LOG_FLOOR`] before any logarithm;
//! - the warped feature domain is the natural log of power, resampled
//!   uniformly on the Bark axis when warping is enabled.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Floor applied to power bins before taking logs, preventing -inf.
pub const LOG_FLOOR: f64 = 1e-10;

/// Default headroom divisor for GCN so normalized data stays inside the
/// tanh output range (-1, 1). Calibrated on held-out synthetic corpora:
/// post-GCN magnitudes stay below 0.95.
pub const DEFAULT_K_RANGE: f64 = 8.0;

/// One frame of nonnegative linear-power spectral values.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFrame {
    bins: Vec<f64>,
}

impl SpectrumFrame {
    pub fn new(bins: Vec<f64>) -> Result<Self> {
        if bins.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArg(
                "spectrum bins must be finite and nonnegative".into(),
            ));
        }
        Ok(SpectrumFrame { bins })
    }

    /// Rebuild a frame from natural-log power values.
    pub fn from_log(log_bins: &[f64]) -> Self {
        SpectrumFrame {
            bins: log_bins.iter().map(|v| v.exp()).collect(),
        }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Traunmüller approximation of the Bark scale.
pub fn hz_to_bark(f: f64) -> f64 {
    26.81 * f / (1960.0 + f) - 0.53
}

/// Inverse of [`hz_to_bark`].
pub fn bark_to_hz(z: f64) -> f64 {
    1960.0 * (z + 0.53) / (26.28 - z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WarpKind {
    Bark,
    None,
}

impl WarpKind {
    pub fn name(self) -> &'static str {
        match self {
            WarpKind::Bark => "bark",
            WarpKind::None => "none",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bark" => Ok(WarpKind::Bark),
            "none" => Ok(WarpKind::None),
            other => Err(Error::Parse(format!("unknown warp kind `{other}`"))),
        }
    }
}

/// Frequency-warping plan: for each output bin, the (fractional) source bin
/// position to read from. Positions are strictly increasing over
/// `[0, n_bins - 1]` with exact endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpSpec {
    n_bins: usize,
    sample_rate: f64,
    kind: WarpKind,
    positions: Vec<f64>,
}

impl WarpSpec {
    pub fn new(n_bins: usize, sample_rate: f64, kind: WarpKind) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::InvalidArg("warp needs at least 2 bins".into()));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidArg(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        let positions = match kind {
            WarpKind::None => Vec::new(),
            WarpKind::Bark => {
                let nyquist = sample_rate / 2.0;
                let bark_hi = hz_to_bark(nyquist);
                let bark_lo = hz_to_bark(0.0);
                let n = n_bins as f64;
                let mut pos = Vec::with_capacity(n_bins);
                for i in 0..n_bins {
                    let z = bark_lo + (bark_hi - bark_lo) * i as f64 / (n - 1.0);
                    let f = bark_to_hz(z);
                    let p = (f / nyquist) * (n - 1.0);
                    pos.push(p.clamp(0.0, n - 1.0));
                }
                // exact endpoints regardless of rounding in the middle
                pos[0] = 0.0;
                pos[n_bins - 1] = n - 1.0;
                pos
            }
        };
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArg(
                "warp source positions must be strictly increasing".into(),
            ));
        }
        Ok(WarpSpec {
            n_bins,
            sample_rate,
            kind,
            positions,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn kind(&self) -> WarpKind {
        self.kind
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Floored natural log of the frame, resampled at the warp positions by
    /// linear interpolation. With `WarpKind::None` this is just the log.
    pub fn apply(&self, frame: &SpectrumFrame) -> Result<Vec<f64>> {
        if frame.len() != self.n_bins {
            return Err(Error::shape(
                "warp",
                format!("{} bins", self.n_bins),
                format!("frame of {} bins", frame.len()),
            ));
        }
        let logspec: Vec<f64> = frame.bins().iter().map(|&v| v.max(LOG_FLOOR).ln()).collect();
        match self.kind {
            WarpKind::None => Ok(logspec),
            WarpKind::Bark => Ok(self
                .positions
                .iter()
                .map(|&p| {
                    let i0 = p.floor() as usize;
                    let frac = p - i0 as f64;
                    if frac == 0.0 || i0 + 1 >= logspec.len() {
                        logspec[i0]
                    } else {
                        logspec[i0] * (1.0 - frac) + logspec[i0 + 1] * frac
                    }
                })
                .collect()),
        }
    }

    /// Row-wise [`apply`](Self::apply) over linear-power frames.
    pub fn apply_batch(&self, frames: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(frames.rows(), self.n_bins);
        for r in 0..frames.rows() {
            let frame = SpectrumFrame::new(frames.row(r).to_vec())?;
            let warped = self.apply(&frame)?;
            out.row_mut(r).copy_from_slice(&warped);
        }
        Ok(out)
    }
}

/// Corpus-level scalar normalization statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GcnStats {
    /// Scalar mean over all frames and dimensions.
    pub mean: f64,
    /// Scalar standard deviation (population), floored at 1e-8.
    pub scale: f64,
    /// Extra headroom divisor keeping normalized values inside (-1, 1).
    pub k_range: f64,
}

impl GcnStats {
    /// Fit mean and scale over every entry of `frames`.
    pub fn fit(frames: &Matrix) -> Result<Self> {
        Self::fit_with_range(frames, DEFAULT_K_RANGE)
    }

    pub fn fit_with_range(frames: &Matrix, k_range: f64) -> Result<Self> {
        if frames.rows() == 0 || frames.cols() == 0 {
            return Err(Error::EmptyDataset("gcn fit".into()));
        }
        if !(k_range > 0.0) {
            return Err(Error::InvalidArg(format!(
                "k_range must be positive, got {k_range}"
            )));
        }
        let n = frames.data().len() as f64;
        let mean = frames.data().iter().sum::<f64>() / n;
        let var = frames
            .data()
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n;
        let scale = var.sqrt().max(1e-8);
        Ok(GcnStats {
            mean,
            scale,
            k_range,
        })
    }

    /// `x' = (x - mean) / (scale * k_range)`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let denom = self.scale * self.k_range;
        x.iter().map(|v| (v - self.mean) / denom).collect()
    }

    /// Exact inverse of [`apply`](Self::apply).
    pub fn invert(&self, x: &[f64]) -> Vec<f64> {
        let denom = self.scale * self.k_range;
        x.iter().map(|v| v * denom + self.mean).collect()
    }

    pub fn apply_batch(&self, frames: &Matrix) -> Matrix {
        let mut out = frames.clone();
        let denom = self.scale * self.k_range;
        for v in out.data_mut() {
            *v = (*v - self.mean) / denom;
        }
        out
    }

    pub fn invert_batch(&self, frames: &Matrix) -> Matrix {
        let mut out = frames.clone();
        let denom = self.scale * self.k_range;
        for v in out.data_mut() {
            *v = *v * denom + self.mean;
        }
        out
    }
}

/// Orthonormal DCT-II of a log spectrum, truncated to `order` coefficients.
/// This is the cepstral-truncation baseline transform.
pub fn cepstrum_from_logspec(logspec: &[f64], order: usize) -> Result<Vec<f64>> {
    let n = logspec.len();
    if order == 0 || order > n {
        return Err(Error::InvalidArg(format!(
            "cepstrum order must be in [1, {n}], got {order}"
        )));
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(order);
    for k in 0..order {
        let mut acc = 0.0;
        for (j, &x) in logspec.iter().enumerate() {
            acc += x * (std::f64::consts::PI * (j as f64 + 0.5) * k as f64 / nf).cos();
        }
        let a = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        out.push(a * acc);
    }
    Ok(out)
}

/// Inverse of [`cepstrum_from_logspec`]: zero-pad to `n_bins` coefficients
/// and apply the inverse orthonormal DCT-II.
pub fn logspec_from_cepstrum(cep: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    if cep.len() > n_bins {
        return Err(Error::InvalidArg(format!(
            "cepstrum of order {} cannot expand to {n_bins} bins",
            cep.len()
        )));
    }
    let nf = n_bins as f64;
    let mut out = Vec::with_capacity(n_bins);
    for j in 0..n_bins {
        let mut acc = 0.0;
        for (k, &c) in cep.iter().enumerate() {
            let a = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            acc += a * c * (std::f64::consts::PI * (j as f64 + 0.5) * k as f64 / nf).cos();
        }
        out.push(acc);
    }
    Ok(out)
}

/// Log-spectral distortion in dB between two linear-power frames:
/// `sqrt(mean_i (20 log10(a_i / b_i))^2)`, bins floored at [`LOG_FLOOR`].
/// Symmetric and zero iff the floored frames are equal.
pub fn log_spectral_distortion(a: &SpectrumFrame, b: &SpectrumFrame) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(
            "log_spectral_distortion",
            format!("{} bins", a.len()),
            format!("{} bins", b.len()),
        ));
    }
    if a.is_empty() {
        return Err(Error::InvalidArg("LSD over empty frames".into()));
    }
    let mut acc = 0.0;
    for (&ai, &bi) in a.bins().iter().zip(b.bins()) {
        // difference of logs rather than log of the ratio: same value, and
        // exactly symmetric in a and b
        let r = 20.0 * (ai.max(LOG_FLOOR).log10() - bi.max(LOG_FLOOR).log10());
        acc += r * r;
    }
    Ok((acc / a.len() as f64).sqrt())
}

/// Mean LSD over paired frames, plus the per-frame values.
pub fn corpus_lsd(
    originals: &[SpectrumFrame],
    reconstructions: &[SpectrumFrame],
) -> Result<(f64, Vec<f64>)> {
    if originals.len() != reconstructions.len() {
        return Err(Error::shape(
            "corpus_lsd",
            format!("{} originals", originals.len()),
            format!("{} reconstructions", reconstructions.len()),
        ));
    }
    if originals.is_empty() {
        return Err(Error::EmptyDataset("corpus_lsd".into()));
    }
    let mut per_frame = Vec::with_capacity(originals.len());
    for (a, b) in originals.iter().zip(reconstructions) {
        per_frame.push(log_spectral_distortion(a, b)?);
    }
    let mean = per_frame.iter().sum::<f64>() / per_frame.len() as f64;
    Ok((mean, per_frame))
}

/// Convert matrix rows (linear power) into frames.
pub fn frames_from_matrix(m: &Matrix) -> Result<Vec<SpectrumFrame>> {
    (0..m.rows())
        .map(|r| SpectrumFrame::new(m.row(r).to_vec()))
        .collect()
}
