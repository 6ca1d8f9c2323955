//! Training: analytic backpropagation through tied-weight stacks, classical
//! momentum SGD, greedy layer-wise pretraining, and whole-network
//! fine-tuning with patience-based early stopping.
//!
//! The optimized objective is the mean squared reconstruction error over
//! batch rows and input dimensions. Because the decoder weight is the
//! transpose of the encoder weight, each weight matrix receives two gradient
//! contributions: one from its encoder path and the transpose of the one
//! from its decoder path, accumulated into the single shared tensor.
//!
//! A run with fixed data, dimensions, hyperparameters, and seeds produces a
//! bit-identical network every time. Per-batch gradient sums accumulate in
//! row order; RNG use is split into fixed streams (0 weight init, 1 batch
//! shuffling, 2 masking) derived from the run seed.

use crate::corrupt::MaskingNoise;
use crate::dae::{mse, Activation, LayerParams, Network};
use crate::error::{Error, Result};
use crate::linalg::{axpy, outer, Matrix};
use crate::rng::{derive_seed, SeededRng};

const STREAM_INIT: u64 = 0;
const STREAM_SHUFFLE: u64 = 1;
const STREAM_MASK: u64 = 2;

/// Hyperparameters for one training run (one pretraining layer or one
/// fine-tuning pass).
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Per-dimension masking probability; `None` trains on clean inputs.
    pub mask_d: Option<f64>,
    pub max_epochs: usize,
    pub patience: usize,
}

pub const DEFAULT_MAX_EPOCHS: usize = 1000;
pub const DEFAULT_PATIENCE: usize = 20;

impl Hyperparams {
    pub fn new(lr: f64, momentum: f64, batch_size: usize, seed: u64) -> Self {
        Hyperparams {
            lr,
            momentum,
            batch_size,
            seed,
            mask_d: None,
            max_epochs: DEFAULT_MAX_EPOCHS,
            patience: DEFAULT_PATIENCE,
        }
    }

    pub fn with_mask(mut self, d: f64) -> Self {
        self.mask_d = Some(d);
        self
    }

    pub fn with_epochs(mut self, max_epochs: usize, patience: usize) -> Self {
        self.max_epochs = max_epochs;
        self.patience = patience;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::InvalidArg(format!("lr must be > 0, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArg(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArg("batch_size must be >= 1".into()));
        }
        if self.patience == 0 {
            return Err(Error::InvalidArg("patience must be >= 1".into()));
        }
        if let Some(d) = self.mask_d {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidArg(format!(
                    "masking probability must be in [0, 1], got {d}"
                )));
            }
        }
        Ok(())
    }
}

/// What to train one layer as: hyperparameters plus its activations.
#[derive(Clone, Debug)]
pub struct LayerSpec {
    pub hp: Hyperparams,
    pub enc_act: Activation,
    pub dec_act: Activation,
}

impl LayerSpec {
    /// Tanh encoder and decoder (the reference configuration).
    pub fn new(hp: Hyperparams) -> Self {
        LayerSpec {
            hp,
            enc_act: Activation::Tanh,
            dec_act: Activation::Tanh,
        }
    }
}

/// Per-epoch losses and stopping metadata for one training run.
#[derive(Clone, Debug, Default)]
pub struct TrainReport {
    /// `(train_loss, valid_loss)` per epoch actually run. The train loss is
    /// the optimized objective (corrupted inputs when denoising); the valid
    /// loss is always measured on clean inputs.
    pub epoch_losses: Vec<(f64, f64)>,
    /// Number of epochs run before stopping.
    pub stopped_epoch: usize,
    /// 1-based epoch of the best validation loss; 0 if no epoch ran.
    pub best_epoch: usize,
    /// Minimum observed validation loss; infinity if no epoch ran.
    pub best_valid_loss: f64,
}

impl TrainReport {
    fn empty() -> Self {
        TrainReport {
            epoch_losses: Vec::new(),
            stopped_epoch: 0,
            best_epoch: 0,
            best_valid_loss: f64::INFINITY,
        }
    }
}

/// Gradients (or velocities) shaped like a stack of layers.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGrad>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub dw: Matrix,
    pub db: Vec<f64>,
    pub db_dec: Vec<f64>,
}

impl GradientSet {
    pub fn zeros_like(layers: &[LayerParams]) -> Self {
        GradientSet {
            layers: layers
                .iter()
                .map(|l| LayerGrad {
                    dw: Matrix::zeros(l.w.rows(), l.w.cols()),
                    db: vec![0.0; l.b.len()],
                    db_dec: vec![0.0; l.b_dec.len()],
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GradientSet) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::shape(
                "GradientSet::add_assign",
                format!("{} layers", self.layers.len()),
                format!("{} layers", other.layers.len()),
            ));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.dw.add_scaled(&b.dw, 1.0)?;
            axpy(&mut a.db, &b.db, 1.0)?;
            axpy(&mut a.db_dec, &b.db_dec, 1.0)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.dw.scale(s);
            for v in &mut l.db {
                *v *= s;
            }
            for v in &mut l.db_dec {
                *v *= s;
            }
        }
    }
}

/// Per-example loss and exact analytic gradients for a full round trip
/// through `layers` (encode all, decode all in reverse).
///
/// Returns `(1/n) * |target - z|^2` for this example together with the
/// derivatives of that quantity with respect to every parameter. Averaging
/// the results over a batch gives the batch-mean objective and its gradient.
fn backprop_layers(
    layers: &[LayerParams],
    x_in: &[f64],
    target: &[f64],
) -> Result<(f64, GradientSet)> {
    let n_in = layers[0].in_dim();
    if x_in.len() != n_in || target.len() != n_in {
        return Err(Error::shape(
            "backprop",
            format!("input dim {n_in}"),
            format!("x len {}, target len {}", x_in.len(), target.len()),
        ));
    }
    let k = layers.len();

    // forward: encoder activations acts[0..=k], decoder outputs dec[0..=k]
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    acts.push(x_in.to_vec());
    for layer in layers {
        let next = layer.encode(acts.last().unwrap())?;
        acts.push(next);
    }
    let mut dec: Vec<Vec<f64>> = vec![Vec::new(); k + 1];
    dec[k] = acts[k].clone();
    for i in (0..k).rev() {
        dec[i] = layers[i].decode(&dec[i + 1])?;
    }

    let z = &dec[0];
    let n = n_in as f64;
    let mut loss = 0.0;
    // dL/dz for L = (1/n) |z - target|^2
    let mut grad: Vec<f64> = Vec::with_capacity(n_in);
    for (zi, ti) in z.iter().zip(target) {
        let diff = zi - ti;
        loss += diff * diff;
        grad.push(2.0 * diff / n);
    }
    loss /= n;

    let mut grads = GradientSet::zeros_like(layers);

    // decoder path: from the output back up to the bottleneck
    for i in 0..k {
        let layer = &layers[i];
        // dec[i] = dec_act(w_i^T * dec[i+1] + b_dec_i)
        let delta_u: Vec<f64> = grad
            .iter()
            .zip(&dec[i])
            .map(|(g, o)| g * layer.dec_act.derivative_from_output(*o))
            .collect();
        grads.layers[i].dw.add_scaled(&outer(&dec[i + 1], &delta_u), 1.0)?;
        axpy(&mut grads.layers[i].db_dec, &delta_u, 1.0)?;
        grad = layer.w.matvec(&delta_u)?;
    }

    // encoder path: from the bottleneck back down to the input
    for i in (0..k).rev() {
        let layer = &layers[i];
        // acts[i+1] = enc_act(w_i * acts[i] + b_i)
        let delta_t: Vec<f64> = grad
            .iter()
            .zip(&acts[i + 1])
            .map(|(g, o)| g * layer.enc_act.derivative_from_output(*o))
            .collect();
        grads.layers[i].dw.add_scaled(&outer(&delta_t, &acts[i]), 1.0)?;
        axpy(&mut grads.layers[i].db, &delta_t, 1.0)?;
        grad = layer.w.matvec_t(&delta_t)?;
    }

    Ok((loss, grads))
}

/// Public wrapper over a whole network. See [`backprop_layers`] semantics.
pub fn backprop_gradients(net: &Network, x_in: &[f64], target: &[f64]) -> Result<(f64, GradientSet)> {
    backprop_layers(net.layers(), x_in, target)
}

fn sgd_step_layers(
    layers: &mut [LayerParams],
    grads: &GradientSet,
    velocity: &mut GradientSet,
    lr: f64,
    momentum: f64,
) -> Result<()> {
    if grads.layers.len() != layers.len() || velocity.layers.len() != layers.len() {
        return Err(Error::shape(
            "sgd_step",
            format!("{} layers", layers.len()),
            format!(
                "grads {} layers, velocity {} layers",
                grads.layers.len(),
                velocity.layers.len()
            ),
        ));
    }
    for ((layer, g), v) in layers.iter_mut().zip(&grads.layers).zip(&mut velocity.layers) {
        // v <- momentum * v - lr * g ; theta <- theta + v
        v.dw.scale(momentum);
        v.dw.add_scaled(&g.dw, -lr)?;
        layer.w.add_scaled(&v.dw, 1.0)?;

        for x in &mut v.db {
            *x *= momentum;
        }
        axpy(&mut v.db, &g.db, -lr)?;
        axpy(&mut layer.b, &v.db, 1.0)?;

        for x in &mut v.db_dec {
            *x *= momentum;
        }
        axpy(&mut v.db_dec, &g.db_dec, -lr)?;
        axpy(&mut layer.b_dec, &v.db_dec, 1.0)?;
    }
    Ok(())
}

/// One classical-momentum update: `v <- m*v - lr*g`, `theta <- theta + v`
/// for every parameter tensor.
pub fn sgd_step(
    net: &mut Network,
    grads: &GradientSet,
    velocity: &mut GradientSet,
    hp: &Hyperparams,
) -> Result<()> {
    sgd_step_layers(&mut net.layers, grads, velocity, hp.lr, hp.momentum)
}

/// Glorot-uniform initialized layer: weights drawn row-major from
/// `U(-r, r)` with `r = sqrt(6 / (in_dim + out_dim))`, biases zero. The
/// draw comes from stream 0 of `seed`, so a training run that starts from
/// the same seed always starts from the same parameters.
pub fn init_layer(
    in_dim: usize,
    out_dim: usize,
    enc_act: Activation,
    dec_act: Activation,
    seed: u64,
) -> Result<LayerParams> {
    if in_dim == 0 || out_dim == 0 {
        return Err(Error::InvalidArg("layer dims must be >= 1".into()));
    }
    let mut rng = SeededRng::new(derive_seed(seed, STREAM_INIT));
    let r = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let w = Matrix::from_vec(out_dim, in_dim, rng.uniform_vec(-r, r, out_dim * in_dim)?)?;
    LayerParams::new(w, vec![0.0; out_dim], vec![0.0; in_dim], enc_act, dec_act)
}

fn mean_valid_loss(layers: &[LayerParams], valid: &Matrix) -> Result<f64> {
    let mut sum = 0.0;
    for r in 0..valid.rows() {
        let mut v = valid.row(r).to_vec();
        for layer in layers {
            v = layer.encode(&v)?;
        }
        for layer in layers.iter().rev() {
            v = layer.decode(&v)?;
        }
        sum += mse(valid.row(r), &v)?;
    }
    Ok(sum / valid.rows() as f64)
}

/// Minibatch momentum-SGD loop shared by pretraining and fine-tuning.
/// Inputs may be masked (denoising); targets are always the clean rows.
/// Stops `patience` epochs after the best validation loss and restores the
/// best-validation parameters.
fn run_sgd(
    layers: &mut Vec<LayerParams>,
    train: &Matrix,
    valid: &Matrix,
    hp: &Hyperparams,
) -> Result<TrainReport> {
    hp.validate()?;
    if train.rows() == 0 {
        return Err(Error::EmptyDataset("training frames".into()));
    }
    if valid.rows() == 0 {
        return Err(Error::EmptyDataset("validation frames".into()));
    }
    let n_in = layers[0].in_dim();
    if train.cols() != n_in || valid.cols() != n_in {
        return Err(Error::shape(
            "run_sgd",
            format!("network input dim {n_in}"),
            format!("train cols {}, valid cols {}", train.cols(), valid.cols()),
        ));
    }

    let mut shuffle_rng = SeededRng::new(derive_seed(hp.seed, STREAM_SHUFFLE));
    let mut noise = match hp.mask_d {
        Some(d) => Some(MaskingNoise::new(d, derive_seed(hp.seed, STREAM_MASK))?),
        None => None,
    };
    let mut velocity = GradientSet::zeros_like(layers);
    let mut report = TrainReport::empty();
    let mut best: Option<(usize, f64, Vec<LayerParams>)> = None;

    let n = train.rows();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=hp.max_epochs {
        shuffle_rng.shuffle(&mut order);
        let mut train_loss_sum = 0.0;
        for chunk in order.chunks(hp.batch_size) {
            let mut grad_acc = GradientSet::zeros_like(layers);
            for &ri in chunk {
                let clean = train.row(ri);
                let corrupted;
                let input: &[f64] = match &mut noise {
                    Some(noise) => {
                        corrupted = noise.corrupt(clean);
                        &corrupted
                    }
                    None => clean,
                };
                let (loss, g) = backprop_layers(layers, input, clean)?;
                train_loss_sum += loss;
                grad_acc.add_assign(&g)?;
            }
            grad_acc.scale(1.0 / chunk.len() as f64);
            sgd_step_layers(layers, &grad_acc, &mut velocity, hp.lr, hp.momentum)?;
        }
        let train_loss = train_loss_sum / n as f64;
        let valid_loss = mean_valid_loss(layers, valid)?;
        if !train_loss.is_finite() || !valid_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                loss: if train_loss.is_finite() { valid_loss } else { train_loss },
            });
        }
        report.epoch_losses.push((train_loss, valid_loss));
        report.stopped_epoch = epoch;

        let improved = best.as_ref().map_or(true, |(_, b, _)| valid_loss < *b);
        if improved {
            best = Some((epoch, valid_loss, layers.clone()));
        }
        let best_epoch = best.as_ref().map_or(0, |(e, _, _)| *e);
        if epoch - best_epoch >= hp.patience {
            break;
        }
    }

    if let Some((best_epoch, best_loss, best_params)) = best {
        report.best_epoch = best_epoch;
        report.best_valid_loss = best_loss;
        *layers = best_params;
    }
    Ok(report)
}

/// Greedy pretraining of a single tied layer: a 1-hidden-layer auto-encoder
/// trained to reconstruct its (optionally masked) input against the clean
/// input, with validation-based early stopping.
pub fn pretrain_layer(
    train: &Matrix,
    valid: &Matrix,
    in_dim: usize,
    out_dim: usize,
    spec: &LayerSpec,
) -> Result<(LayerParams, TrainReport)> {
    if train.cols() != in_dim {
        return Err(Error::shape(
            "pretrain_layer",
            format!("in_dim {in_dim}"),
            format!("train cols {}", train.cols()),
        ));
    }
    let layer = init_layer(in_dim, out_dim, spec.enc_act, spec.dec_act, spec.hp.seed)?;
    let mut layers = vec![layer];
    let report = run_sgd(&mut layers, train, valid, &spec.hp)?;
    Ok((layers.pop().unwrap(), report))
}

/// Greedy layer-wise pretraining of a full stack.
///
/// Layer `k` trains on the clean encodings produced by the already-trained
/// layers `1..k`; masking, when configured, is applied freshly inside each
/// layer's own loop. Returns the stacked network plus one report per layer.
pub fn pretrain_stack(
    train: &Matrix,
    valid: &Matrix,
    dims: &[usize],
    specs: &[LayerSpec],
) -> Result<(Network, Vec<TrainReport>)> {
    if dims.len() < 2 {
        return Err(Error::InvalidArg(format!(
            "need at least two dims to form a layer, got {dims:?}"
        )));
    }
    if specs.len() != dims.len() - 1 {
        return Err(Error::InvalidArg(format!(
            "{} dims require {} layer specs, got {}",
            dims.len(),
            dims.len() - 1,
            specs.len()
        )));
    }
    if train.cols() != dims[0] {
        return Err(Error::shape(
            "pretrain_stack",
            format!("dims[0] = {}", dims[0]),
            format!("train cols {}", train.cols()),
        ));
    }

    let mut cur_train = train.clone();
    let mut cur_valid = valid.clone();
    let mut layers = Vec::with_capacity(specs.len());
    let mut reports = Vec::with_capacity(specs.len());
    for (k, spec) in specs.iter().enumerate() {
        let (layer, report) = pretrain_layer(&cur_train, &cur_valid, dims[k], dims[k + 1], spec)?;
        // the next layer trains on clean encodings
        cur_train = layer.encode_batch(&cur_train)?;
        cur_valid = layer.encode_batch(&cur_valid)?;
        layers.push(layer);
        reports.push(report);
    }
    Ok((Network::new(layers)?, reports))
}

/// Whole-network fine-tuning: joint momentum-SGD over all tied weights and
/// biases, clean inputs and clean targets, early-stopped on validation loss.
/// The network is left at the best-validation parameters.
pub fn finetune(
    net: &mut Network,
    train: &Matrix,
    valid: &Matrix,
    hp: &Hyperparams,
) -> Result<TrainReport> {
    if hp.mask_d.is_some() {
        return Err(Error::InvalidArg(
            "fine-tuning uses clean inputs; mask_d must be unset".into(),
        ));
    }
    if hp.max_epochs == 0 {
        return Ok(TrainReport::empty());
    }
    run_sgd(&mut net.layers, train, valid, hp)
}
