//! Tied-weight auto-encoder layers and stacked networks.
//!
//! A layer owns one weight matrix `w` plus an encoder bias and a decoder
//! bias. Encoding computes `enc_act(w * x + b)`; decoding computes
//! `dec_act(w^T * y + b_dec)`. The decoder weight is never stored: decoding
//! always reads the transpose of the current `w`, so the tying constraint
//! holds by construction even while training mutates `w`.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Unit nonlinearity. Tanh everywhere matches the reference configuration;
/// Linear decoding is available per layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Tanh => t.tanh(),
            Activation::Linear => t,
        }
    }

    /// Derivative expressed through the activation output `o = apply(t)`.
    /// For tanh this is `1 - o^2` (= sech^2(t)); for linear it is 1.
    #[inline]
    pub fn derivative_from_output(self, o: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - o * o,
            Activation::Linear => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "linear" => Ok(Activation::Linear),
            other => Err(Error::Parse(format!("unknown activation `{other}`"))),
        }
    }
}

/// One tied-weight auto-encoder layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    /// `out_dim x in_dim` weight, shared by encoder and decoder.
    pub w: Matrix,
    /// Encoder bias, length `out_dim`.
    pub b: Vec<f64>,
    /// Decoder bias, length `in_dim`.
    pub b_dec: Vec<f64>,
    pub enc_act: Activation,
    pub dec_act: Activation,
}

impl LayerParams {
    pub fn new(
        w: Matrix,
        b: Vec<f64>,
        b_dec: Vec<f64>,
        enc_act: Activation,
        dec_act: Activation,
    ) -> Result<Self> {
        if w.rows() != b.len() || w.cols() != b_dec.len() {
            return Err(Error::shape(
                "LayerParams::new",
                format!("w {}x{}", w.rows(), w.cols()),
                format!("b len {}, b_dec len {}", b.len(), b_dec.len()),
            ));
        }
        Ok(LayerParams {
            w,
            b,
            b_dec,
            enc_act,
            dec_act,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    /// `enc_act(w * x + b)`.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut t = self.w.matvec(x)?;
        for (ti, bi) in t.iter_mut().zip(&self.b) {
            *ti = self.enc_act.apply(*ti + bi);
        }
        Ok(t)
    }

    /// `dec_act(w^T * y + b_dec)`, tied to the current `w`.
    pub fn decode(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut u = self.w.matvec_t(y)?;
        for (ui, bi) in u.iter_mut().zip(&self.b_dec) {
            *ui = self.dec_act.apply(*ui + bi);
        }
        Ok(u)
    }

    /// Row-wise [`encode`](Self::encode) over a frame matrix.
    pub fn encode_batch(&self, xs: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(xs.rows(), self.out_dim());
        for r in 0..xs.rows() {
            let y = self.encode(xs.row(r))?;
            out.row_mut(r).copy_from_slice(&y);
        }
        Ok(out)
    }
}

/// Ordered stack of tied-weight layers.
///
/// Immutable during inference; concurrent `encode`/`reconstruct` calls on a
/// shared network are safe. Training requires exclusive access.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub(crate) layers: Vec<LayerParams>,
}

impl Network {
    /// Build from layers; adjacent dimensions must chain.
    pub fn new(layers: Vec<LayerParams>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArg("network needs at least one layer".into()));
        }
        for k in 1..layers.len() {
            if layers[k].in_dim() != layers[k - 1].out_dim() {
                return Err(Error::shape(
                    "Network::new",
                    format!("layer {} out dim {}", k - 1, layers[k - 1].out_dim()),
                    format!("layer {} in dim {}", k, layers[k].in_dim()),
                ));
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams] {
        &mut self.layers
    }

    /// Layer widths, input first: e.g. `[2049, 500, 180, 120]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = Vec::with_capacity(self.layers.len() + 1);
        d.push(self.layers[0].in_dim());
        d.extend(self.layers.iter().map(LayerParams::out_dim));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn bottleneck_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// Encode through every layer; output length equals the bottleneck dim.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = x.to_vec();
        for layer in &self.layers {
            v = layer.encode(&v)?;
        }
        Ok(v)
    }

    /// Decode a bottleneck vector through every layer in reverse.
    pub fn decode(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut v = y.to_vec();
        for layer in self.layers.iter().rev() {
            v = layer.decode(&v)?;
        }
        Ok(v)
    }

    /// Full round trip: encode to the bottleneck, then decode back.
    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.encode(x)?;
        self.decode(&y)
    }

    pub fn encode_batch(&self, xs: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(xs.rows(), self.bottleneck_dim());
        for r in 0..xs.rows() {
            let y = self.encode(xs.row(r))?;
            out.row_mut(r).copy_from_slice(&y);
        }
        Ok(out)
    }

    pub fn reconstruct_batch(&self, xs: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(xs.rows(), self.input_dim());
        for r in 0..xs.rows() {
            let z = self.reconstruct(xs.row(r))?;
            out.row_mut(r).copy_from_slice(&z);
        }
        Ok(out)
    }

    /// Mean reconstruction error over the rows of `xs`.
    pub fn mean_reconstruction_loss(&self, xs: &Matrix) -> Result<f64> {
        if xs.rows() == 0 {
            return Err(Error::EmptyDataset("mean_reconstruction_loss".into()));
        }
        let mut sum = 0.0;
        for r in 0..xs.rows() {
            let z = self.reconstruct(xs.row(r))?;
            sum += mse(xs.row(r), &z)?;
        }
        Ok(sum / xs.rows() as f64)
    }
}

/// Mean squared error `(1/n) * sum (x_i - z_i)^2`.
pub fn mse(x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::shape(
            "mse",
            format!("len {}", x.len()),
            format!("len {}", z.len()),
        ));
    }
    if x.is_empty() {
        return Err(Error::InvalidArg("mse over empty vectors".into()));
    }
    let sum: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(
        w: Vec<Vec<f64>>,
        b: Vec<f64>,
        b_dec: Vec<f64>,
        enc: Activation,
        dec: Activation,
    ) -> LayerParams {
        LayerParams::new(Matrix::from_rows(&w).unwrap(), b, b_dec, enc, dec).unwrap()
    }

    #[test]
    fn encode_zero_params_is_zero() {
        let l = layer(
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Activation::Tanh,
            Activation::Tanh,
        );
        assert_eq!(l.encode(&[3.0, -4.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn encode_scalar_tanh() {
        let l = layer(
            vec![vec![1.0]],
            vec![0.0],
            vec![0.0],
            Activation::Tanh,
            Activation::Tanh,
        );
        let y = l.encode(&[0.5]).unwrap();
        assert!((y[0] - 0.5f64.tanh()).abs() < 1e-15);
        assert!((y[0] - 0.46211715726000974).abs() < 1e-12);
    }

    #[test]
    fn decode_zero_input_linear_gives_bias() {
        let l = layer(
            vec![vec![2.0, -1.0]],
            vec![0.0],
            vec![0.5, -0.25],
            Activation::Tanh,
            Activation::Linear,
        );
        assert_eq!(l.decode(&[0.0]).unwrap(), vec![0.5, -0.25]);
    }

    #[test]
    fn decode_scalar_linear() {
        let l = layer(
            vec![vec![2.0]],
            vec![0.0],
            vec![1.0],
            Activation::Tanh,
            Activation::Linear,
        );
        assert_eq!(l.decode(&[1.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn decode_tracks_weight_mutation() {
        let mut l = layer(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Activation::Tanh,
            Activation::Linear,
        );
        let y = [0.5, -0.5];
        let before = l.decode(&y).unwrap();
        l.w.set(0, 1, 10.0);
        let after = l.decode(&y).unwrap();
        assert_ne!(before, after);
        // identical to decoding with an explicit transposed copy
        let explicit = {
            let mut u = l.w.transpose().matvec(&y).unwrap();
            for (ui, bi) in u.iter_mut().zip(&l.b_dec) {
                *ui = l.dec_act.apply(*ui + bi);
            }
            u
        };
        assert_eq!(after, explicit);
    }

    #[test]
    fn single_layer_network_matches_layer() {
        let l = layer(
            vec![vec![0.3, -0.2], vec![0.1, 0.4], vec![-0.5, 0.6]],
            vec![0.01, -0.02, 0.03],
            vec![0.0, 0.0],
            Activation::Tanh,
            Activation::Tanh,
        );
        let net = Network::new(vec![l.clone()]).unwrap();
        let x = [0.2, -0.7];
        assert_eq!(net.encode(&x).unwrap(), l.encode(&x).unwrap());
    }

    #[test]
    fn identity_linear_net_reconstructs_exactly() {
        let l = layer(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Activation::Linear,
            Activation::Linear,
        );
        let net = Network::new(vec![l]).unwrap();
        let x = [0.25, -0.5];
        assert_eq!(net.reconstruct(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn zero_net_encodes_to_zero() {
        let l1 = layer(
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            Activation::Tanh,
            Activation::Tanh,
        );
        let l2 = layer(
            vec![vec![0.0, 0.0]],
            vec![0.0],
            vec![0.0, 0.0],
            Activation::Tanh,
            Activation::Tanh,
        );
        let net = Network::new(vec![l1, l2]).unwrap();
        assert_eq!(net.encode(&[1.0, -1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn reconstruct_matches_manual_composition() {
        let mut rng = crate::rng::SeededRng::new(99);
        let w1 = Matrix::from_vec(3, 5, rng.uniform_vec(-0.8, 0.8, 15).unwrap()).unwrap();
        let b1 = rng.uniform_vec(-0.1, 0.1, 3).unwrap();
        let bd1 = rng.uniform_vec(-0.1, 0.1, 5).unwrap();
        let l1 = LayerParams::new(w1, b1, bd1, Activation::Tanh, Activation::Tanh).unwrap();
        let net = Network::new(vec![l1.clone()]).unwrap();
        let x: Vec<f64> = rng.uniform_vec(-0.9, 0.9, 5).unwrap();

        let y = l1.encode(&x).unwrap();
        let z_manual = l1.decode(&y).unwrap();
        let z = net.reconstruct(&x).unwrap();
        for (a, b) in z.iter().zip(&z_manual) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn network_rejects_mismatched_layers() {
        let l1 = layer(
            vec![vec![0.0, 0.0]],
            vec![0.0],
            vec![0.0, 0.0],
            Activation::Tanh,
            Activation::Tanh,
        );
        let l2 = layer(
            vec![vec![0.0, 0.0]],
            vec![0.0],
            vec![0.0, 0.0],
            Activation::Tanh,
            Activation::Tanh,
        );
        assert!(Network::new(vec![l1, l2]).is_err());
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        let a = [0.3, -0.4, 1.2];
        let b = [0.1, 0.2, -0.9];
        assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }
}
