//! Drivers behind the `sbx` subcommands. Each function does the whole job
//! (load, compute, write) and returns a summary the caller can inspect;
//! the thin binary maps errors to exit codes.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{HpBlock, SplitConfig, TrainConfig};
use crate::dae::{mse, Network};
use crate::error::{Error, Result};
use crate::io::{read_frames, write_frames};
use crate::linalg::Matrix;
use crate::model::SpectralModel;
use crate::rng::{derive_seed, SeededRng};
use crate::spectral::{
    cepstrum_from_logspec, corpus_lsd, frames_from_matrix, logspec_from_cepstrum, GcnStats,
    WarpSpec,
};
use crate::synth::synthetic_corpus;
use crate::train::{finetune, pretrain_stack, LayerSpec, TrainReport};

/// Seed streams for experiment runs: per-layer pretraining seeds and the
/// fine-tuning seed are derived from the run seed so one number controls a
/// whole run.
const EXP_STREAM_LAYER_BASE: u64 = 100;
const EXP_STREAM_FINETUNE: u64 = 200;

fn require_nonempty(frames: &Matrix, what: &str) -> Result<()> {
    if frames.rows() == 0 {
        return Err(Error::EmptyDataset(what.to_string()));
    }
    Ok(())
}

fn exp_batch(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for v in out.data_mut() {
        *v = v.exp();
    }
    out
}

/// Mean over rows of the per-row MSE between equal-shape matrices.
fn mean_mse_rows(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::shape(
            "mean_mse_rows",
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
        ));
    }
    let mut sum = 0.0;
    for r in 0..a.rows() {
        sum += mse(a.row(r), b.row(r))?;
    }
    Ok(sum / a.rows() as f64)
}

fn select_rows(frames: &Matrix, idx: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(idx.len(), frames.cols());
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).copy_from_slice(frames.row(i));
    }
    out
}

/// Shuffle row indices with the split seed, then partition by the
/// configured fractions (train / valid / test).
pub fn split_rows(frames: &Matrix, split: &SplitConfig) -> Result<(Matrix, Matrix, Matrix)> {
    split.validate()?;
    let n = frames.rows();
    let mut idx: Vec<usize> = (0..n).collect();
    SeededRng::new(split.seed).shuffle(&mut idx);
    let n_train = ((split.train * n as f64).floor() as usize).min(n);
    let n_valid = ((split.valid * n as f64).floor() as usize).min(n - n_train);
    if n_train == 0 || n_valid == 0 {
        return Err(Error::InvalidArg(format!(
            "split of {n} frames leaves train={n_train}, valid={n_valid}"
        )));
    }
    let train = select_rows(frames, &idx[..n_train]);
    let valid = select_rows(frames, &idx[n_train..n_train + n_valid]);
    let test = select_rows(frames, &idx[n_train + n_valid..]);
    Ok((train, valid, test))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn pretrain_report_csv(reports: &[TrainReport]) -> String {
    let mut csv = String::from("layer,epoch,train_loss,valid_loss\n");
    for (k, report) in reports.iter().enumerate() {
        for (e, (t, v)) in report.epoch_losses.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{},{}", k + 1, e + 1, t, v);
        }
    }
    csv
}

fn finetune_report_csv(report: &TrainReport) -> String {
    let mut csv = String::from("epoch,train_loss,valid_loss\n");
    for (e, (t, v)) in report.epoch_losses.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", e + 1, t, v);
    }
    csv
}

fn seeds_meta(blocks: &[HpBlock]) -> String {
    blocks
        .iter()
        .map(|b| b.s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn hp_meta(blocks: &[HpBlock]) -> String {
    blocks
        .iter()
        .map(|b| {
            format!(
                "lr={} m={} b={} d={}",
                b.lr,
                b.m,
                b.b,
                b.d.map_or("na".to_string(), |d| d.to_string())
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Greedy layer-wise pretraining from a config plus train/valid frame
/// files; writes a self-contained model and, optionally, a per-layer
/// per-epoch loss report.
pub fn cmd_pretrain(
    config_path: &Path,
    train_path: &Path,
    valid_path: &Path,
    out_model: &Path,
    report_path: Option<&Path>,
) -> Result<()> {
    let cfg = TrainConfig::from_path(config_path)?;
    let train = read_frames(train_path)?;
    let valid = read_frames(valid_path)?;
    require_nonempty(&train, &format!("training frames ({})", train_path.display()))?;
    require_nonempty(&valid, &format!("validation frames ({})", valid_path.display()))?;
    if train.cols() != cfg.dims[0] {
        return Err(Error::shape(
            "pretrain",
            format!("config dims[0] = {}", cfg.dims[0]),
            format!("training frames with {} dims", train.cols()),
        ));
    }

    let warp = WarpSpec::new(cfg.dims[0], cfg.sample_rate, cfg.warp_kind())?;
    let warped_train = warp.apply_batch(&train)?;
    let warped_valid = warp.apply_batch(&valid)?;
    let gcn = GcnStats::fit_with_range(&warped_train, cfg.k_range)?;
    let pre_train = gcn.apply_batch(&warped_train);
    let pre_valid = gcn.apply_batch(&warped_valid);

    let specs = cfg.layer_specs()?;
    let (net, reports) = pretrain_stack(&pre_train, &pre_valid, &cfg.dims, &specs)?;

    let model = SpectralModel::new(net, gcn, warp)?
        .with_meta("pretrain_seeds", seeds_meta(&cfg.layers))?
        .with_meta("pretrain_hp", hp_meta(&cfg.layers))?;
    model.save(out_model)?;

    if let Some(path) = report_path {
        write_text(path, &pretrain_report_csv(&reports))?;
    }
    for (k, r) in reports.iter().enumerate() {
        println!(
            "layer {}: {} epochs, best valid loss {} (epoch {})",
            k + 1,
            r.stopped_epoch,
            r.best_valid_loss,
            r.best_epoch
        );
    }
    println!("wrote model to {}", out_model.display());
    Ok(())
}

/// Joint fine-tuning of a pretrained model against train/valid frame files.
pub fn cmd_finetune(
    config_path: &Path,
    model_in: &Path,
    train_path: &Path,
    valid_path: &Path,
    model_out: &Path,
    report_path: Option<&Path>,
) -> Result<()> {
    let cfg = TrainConfig::from_path(config_path)?;
    let block = cfg
        .finetune
        .as_ref()
        .ok_or_else(|| Error::InvalidArg("config has no [finetune] block".into()))?;
    let mut model = SpectralModel::load(model_in)?;
    let train = read_frames(train_path)?;
    let valid = read_frames(valid_path)?;
    require_nonempty(&train, &format!("training frames ({})", train_path.display()))?;
    require_nonempty(&valid, &format!("validation frames ({})", valid_path.display()))?;
    if train.cols() != model.input_dim() {
        return Err(Error::shape(
            "finetune",
            format!("model input dim {}", model.input_dim()),
            format!("training frames with {} dims", train.cols()),
        ));
    }

    // reuse the model's own preprocessing; do not refit
    let pre_train = model.preprocess(&train)?;
    let pre_valid = model.preprocess(&valid)?;
    let hp = block.hyperparams();
    let report = finetune(&mut model.net, &pre_train, &pre_valid, &hp)?;

    let model = model
        .with_meta("finetune_seed", block.s.to_string())?
        .with_meta("finetune_hp", hp_meta(std::slice::from_ref(block)))?;
    model.save(model_out)?;

    if let Some(path) = report_path {
        write_text(path, &finetune_report_csv(&report))?;
    }
    println!(
        "finetune: {} epochs, best valid loss {} (epoch {})",
        report.stopped_epoch, report.best_valid_loss, report.best_epoch
    );
    println!("wrote model to {}", model_out.display());
    Ok(())
}

/// Extract bottleneck features from linear-power frames.
pub fn cmd_encode(model_path: &Path, frames_in: &Path, features_out: &Path) -> Result<()> {
    let model = SpectralModel::load(model_path)?;
    let frames = read_frames(frames_in)?;
    if frames.cols() != model.input_dim() {
        return Err(Error::shape(
            "encode",
            format!("model input dim {}", model.input_dim()),
            format!("frames with {} dims", frames.cols()),
        ));
    }
    let features = model.encode_frames(&frames)?;
    write_frames(features_out, &features)?;
    println!(
        "encoded {} frames: {} -> {} dims",
        frames.rows(),
        frames.cols(),
        features.cols()
    );
    Ok(())
}

/// Reconstruct frames through the bottleneck. The output holds linear
/// power on the model's warped frequency axis; `--ref-out` additionally
/// writes the originals mapped onto that same axis so the two files are
/// directly comparable with `eval`.
pub fn cmd_reconstruct(
    model_path: &Path,
    frames_in: &Path,
    frames_out: &Path,
    ref_out: Option<&Path>,
) -> Result<()> {
    let model = SpectralModel::load(model_path)?;
    let frames = read_frames(frames_in)?;
    if frames.cols() != model.input_dim() {
        return Err(Error::shape(
            "reconstruct",
            format!("model input dim {}", model.input_dim()),
            format!("frames with {} dims", frames.cols()),
        ));
    }
    let recon = model.reconstruct_linear(&frames)?;
    write_frames(frames_out, &recon)?;
    if let Some(path) = ref_out {
        let reference = exp_batch(&model.warp.apply_batch(&frames)?);
        write_frames(path, &reference)?;
    }
    println!(
        "reconstructed {} frames of {} dims",
        recon.rows(),
        recon.cols()
    );
    Ok(())
}

#[derive(Clone, Debug)]
pub struct EvalSummary {
    pub mean_lsd_db: f64,
    pub mean_mse: f64,
    pub per_frame: Vec<(f64, f64)>,
}

/// Compare two frame files of linear-power spectra in the same domain:
/// mean log-spectral distortion and mean per-frame MSE.
pub fn cmd_eval(
    originals_path: &Path,
    reconstructions_path: &Path,
    report_path: Option<&Path>,
) -> Result<EvalSummary> {
    let originals = read_frames(originals_path)?;
    let recons = read_frames(reconstructions_path)?;
    if originals.rows() != recons.rows() {
        return Err(Error::shape(
            "eval",
            format!("{} original frames", originals.rows()),
            format!("{} reconstructed frames", recons.rows()),
        ));
    }
    require_nonempty(&originals, &format!("frames ({})", originals_path.display()))?;
    let orig_frames = frames_from_matrix(&originals)?;
    let recon_frames = frames_from_matrix(&recons)?;
    let (mean_lsd, per_lsd) = corpus_lsd(&orig_frames, &recon_frames)?;

    let mut per_frame = Vec::with_capacity(per_lsd.len());
    let mut mse_sum = 0.0;
    for (r, lsd) in per_lsd.iter().enumerate() {
        let m = mse(originals.row(r), recons.row(r))?;
        mse_sum += m;
        per_frame.push((*lsd, m));
    }
    let mean_mse = mse_sum / per_frame.len() as f64;

    if let Some(path) = report_path {
        let mut csv = String::from("frame,lsd_db,mse\n");
        for (r, (lsd, m)) in per_frame.iter().enumerate() {
            let _ = writeln!(csv, "{r},{lsd},{m}");
        }
        write_text(path, &csv)?;
    }
    println!("mean_lsd_db={mean_lsd}");
    println!("mean_mse={mean_mse}");
    Ok(EvalSummary {
        mean_lsd_db: mean_lsd,
        mean_mse,
        per_frame,
    })
}

/// Write a deterministic synthetic corpus of linear-power frames.
pub fn cmd_synth_data(seed: u64, n_frames: usize, n_bins: usize, out: &Path) -> Result<()> {
    if n_frames == 0 || n_bins < 2 {
        return Err(Error::InvalidArg(format!(
            "need n_frames >= 1 and n_bins >= 2, got {n_frames} frames x {n_bins} bins"
        )));
    }
    let frames = synthetic_corpus(seed, n_frames, n_bins);
    write_frames(out, &frames)?;
    println!(
        "wrote {n_frames} frames x {n_bins} bins (seed {seed}) to {}",
        out.display()
    );
    Ok(())
}

/// Dims chain for a reduced-depth variant with the same bottleneck:
/// the first `depth - 1` hidden widths, then the bottleneck.
fn depth_dims(full: &[usize], depth: usize) -> Vec<usize> {
    let mut dims: Vec<usize> = full[..depth].to_vec();
    dims.push(*full.last().unwrap());
    dims
}

/// Layer hyperparameter blocks for a reduced-depth variant: prefix blocks
/// for the prefix edges, the last block for the edge into the bottleneck.
fn depth_blocks(blocks: &[HpBlock], depth: usize) -> Vec<HpBlock> {
    let mut out: Vec<HpBlock> = blocks[..depth - 1].to_vec();
    out.push(blocks.last().unwrap().clone());
    out
}

/// Specs for one experiment run: config blocks with seeds derived from the
/// run seed (stream `100 + layer` for layers, `200` for finetune).
fn derived_specs(blocks: &[HpBlock], run_seed: u64) -> Result<Vec<LayerSpec>> {
    blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let mut spec = b.layer_spec()?;
            spec.hp.seed = derive_seed(run_seed, EXP_STREAM_LAYER_BASE + j as u64);
            Ok(spec)
        })
        .collect()
}

fn train_run(
    dims: &[usize],
    blocks: &[HpBlock],
    finetune_block: &HpBlock,
    run_seed: u64,
    train: &Matrix,
    valid: &Matrix,
) -> Result<Network> {
    let specs = derived_specs(blocks, run_seed)?;
    let (mut net, _) = pretrain_stack(train, valid, dims, &specs)?;
    let mut hp = finetune_block.hyperparams();
    hp.seed = derive_seed(run_seed, EXP_STREAM_FINETUNE);
    finetune(&mut net, train, valid, &hp)?;
    Ok(net)
}

#[derive(Clone, Debug)]
pub struct DepthRow {
    pub depth: usize,
    pub seed: u64,
    pub train_mse: f64,
    pub valid_mse: f64,
    pub test_mse: f64,
}

/// Depth sweep: trains 1..=L-layer variants with the same bottleneck over
/// every experiment seed and reports reconstruction MSE (in the warped-log
/// domain) per split. CSV columns: depth,seed,train_mse,valid_mse,test_mse.
pub fn cmd_exp_depth(config_path: &Path, data_path: &Path, out_csv: &Path) -> Result<Vec<DepthRow>> {
    let cfg = TrainConfig::from_path(config_path)?;
    let exp = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| Error::InvalidArg("config has no [experiment] block".into()))?;
    let ft_block = cfg
        .finetune
        .as_ref()
        .ok_or_else(|| Error::InvalidArg("config has no [finetune] block".into()))?;
    if exp.seeds.is_empty() {
        return Err(Error::InvalidArg("experiment needs at least one seed".into()));
    }
    let data = read_frames(data_path)?;
    require_nonempty(&data, &format!("corpus ({})", data_path.display()))?;
    if data.cols() != cfg.dims[0] {
        return Err(Error::shape(
            "exp-depth",
            format!("config dims[0] = {}", cfg.dims[0]),
            format!("corpus frames with {} dims", data.cols()),
        ));
    }

    let warp = WarpSpec::new(cfg.dims[0], cfg.sample_rate, cfg.warp_kind())?;
    let warped = warp.apply_batch(&data)?;
    let (train_w, valid_w, test_w) = split_rows(&warped, &cfg.split)?;
    require_nonempty(&test_w, "test split")?;
    let gcn = GcnStats::fit_with_range(&train_w, cfg.k_range)?;
    let (train, valid, test) = (
        gcn.apply_batch(&train_w),
        gcn.apply_batch(&valid_w),
        gcn.apply_batch(&test_w),
    );

    let n_depths = cfg.dims.len() - 1;
    let mut rows = Vec::new();
    for depth in 1..=n_depths {
        let dims = depth_dims(&cfg.dims, depth);
        let blocks = depth_blocks(&cfg.layers, depth);
        for &seed in &exp.seeds {
            let net = train_run(&dims, &blocks, ft_block, seed, &train, &valid)?;
            let m = |pre: &Matrix, warped_ref: &Matrix| -> Result<f64> {
                let recon = gcn.invert_batch(&net.reconstruct_batch(pre)?);
                mean_mse_rows(warped_ref, &recon)
            };
            rows.push(DepthRow {
                depth,
                seed,
                train_mse: m(&train, &train_w)?,
                valid_mse: m(&valid, &valid_w)?,
                test_mse: m(&test, &test_w)?,
            });
            println!(
                "depth {depth} seed {seed}: test mse {}",
                rows.last().unwrap().test_mse
            );
        }
    }

    let mut csv = String::from("depth,seed,train_mse,valid_mse,test_mse\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.depth, r.seed, r.train_mse, r.valid_mse, r.test_mse
        );
    }
    write_text(out_csv, &csv)?;
    println!("wrote {} rows to {}", rows.len(), out_csv.display());
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct BaselineRow {
    pub method: String,
    pub k: usize,
    pub seed: u64,
    pub mean_lsd_db: f64,
    pub mean_mse: f64,
}

/// Auto-encoder vs cepstral-truncation baseline at the same dimensionality
/// `k` (the bottleneck width), on the held-out test split. Both methods
/// compress the identical warped log spectra; LSD and MSE are computed in
/// that shared domain. CSV columns: method,k,seed,mean_lsd_db,mean_mse.
///
/// `dump_dir`, when given, receives the test originals and per-method
/// reconstructions as linear-power frame files on the warped axis.
pub fn cmd_exp_baseline(
    config_path: &Path,
    data_path: &Path,
    out_csv: &Path,
    dump_dir: Option<&Path>,
) -> Result<Vec<BaselineRow>> {
    let cfg = TrainConfig::from_path(config_path)?;
    let exp = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| Error::InvalidArg("config has no [experiment] block".into()))?;
    let ft_block = cfg
        .finetune
        .as_ref()
        .ok_or_else(|| Error::InvalidArg("config has no [finetune] block".into()))?;
    if exp.seeds.is_empty() {
        return Err(Error::InvalidArg("experiment needs at least one seed".into()));
    }
    let k = *cfg.dims.last().unwrap();
    if let Some(order) = exp.cep_order {
        if order != k {
            return Err(Error::InvalidArg(format!(
                "cep_order {order} must equal the bottleneck dim {k} for a fair comparison"
            )));
        }
    }

    let data = read_frames(data_path)?;
    require_nonempty(&data, &format!("corpus ({})", data_path.display()))?;
    if data.cols() != cfg.dims[0] {
        return Err(Error::shape(
            "exp-baseline",
            format!("config dims[0] = {}", cfg.dims[0]),
            format!("corpus frames with {} dims", data.cols()),
        ));
    }

    let warp = WarpSpec::new(cfg.dims[0], cfg.sample_rate, cfg.warp_kind())?;
    let warped = warp.apply_batch(&data)?;
    let (train_w, valid_w, test_w) = split_rows(&warped, &cfg.split)?;
    require_nonempty(&test_w, "test split")?;
    let gcn = GcnStats::fit_with_range(&train_w, cfg.k_range)?;
    let (train, valid, test) = (
        gcn.apply_batch(&train_w),
        gcn.apply_batch(&valid_w),
        gcn.apply_batch(&test_w),
    );

    let n_bins = cfg.dims[0];
    let test_lin = exp_batch(&test_w);
    let test_frames = frames_from_matrix(&test_lin)?;

    // cepstral truncation: same for every seed (no training involved)
    let mut dct_recon_w = Matrix::zeros(test_w.rows(), n_bins);
    for r in 0..test_w.rows() {
        let cep = cepstrum_from_logspec(test_w.row(r), k)?;
        let back = logspec_from_cepstrum(&cep, n_bins)?;
        dct_recon_w.row_mut(r).copy_from_slice(&back);
    }
    let dct_lin = exp_batch(&dct_recon_w);
    let (dct_lsd, _) = corpus_lsd(&test_frames, &frames_from_matrix(&dct_lin)?)?;
    let dct_mse = mean_mse_rows(&test_w, &dct_recon_w)?;

    if let Some(dir) = dump_dir {
        std::fs::create_dir_all(dir)?;
        write_frames(&dir.join("test_original.sbfm"), &test_lin)?;
        write_frames(&dir.join("recon_dct.sbfm"), &dct_lin)?;
    }

    let mut rows = Vec::new();
    for &seed in &exp.seeds {
        let net = train_run(&cfg.dims, &cfg.layers, ft_block, seed, &train, &valid)?;
        let recon_w = gcn.invert_batch(&net.reconstruct_batch(&test)?);
        let recon_lin = exp_batch(&recon_w);
        let (ae_lsd, _) = corpus_lsd(&test_frames, &frames_from_matrix(&recon_lin)?)?;
        let ae_mse = mean_mse_rows(&test_w, &recon_w)?;
        if let Some(dir) = dump_dir {
            write_frames(&dir.join(format!("recon_ae_seed{seed}.sbfm")), &recon_lin)?;
        }
        rows.push(BaselineRow {
            method: "autoencoder".into(),
            k,
            seed,
            mean_lsd_db: ae_lsd,
            mean_mse: ae_mse,
        });
        rows.push(BaselineRow {
            method: "dct".into(),
            k,
            seed,
            mean_lsd_db: dct_lsd,
            mean_mse: dct_mse,
        });
        println!("seed {seed}: autoencoder lsd {ae_lsd} dB vs dct lsd {dct_lsd} dB");
    }

    let mut csv = String::from("method,k,seed,mean_lsd_db,mean_mse\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.method, r.k, r.seed, r.mean_lsd_db, r.mean_mse
        );
    }
    write_text(out_csv, &csv)?;
    println!("wrote {} rows to {}", rows.len(), out_csv.display());
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_partition_covers_all_rows() {
        let frames = crate::synth::synthetic_corpus(1, 103, 8);
        let split = SplitConfig::default();
        let (train, valid, test) = split_rows(&frames, &split).unwrap();
        assert_eq!(train.rows() + valid.rows() + test.rows(), 103);
        assert_eq!(train.rows(), 82);
        assert_eq!(valid.rows(), 10);
    }

    #[test]
    fn split_is_deterministic() {
        let frames = crate::synth::synthetic_corpus(2, 50, 8);
        let split = SplitConfig::default();
        let (a, _, _) = split_rows(&frames, &split).unwrap();
        let (b, _, _) = split_rows(&frames, &split).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depth_dims_and_blocks() {
        let full = vec![64, 32, 16, 8];
        assert_eq!(depth_dims(&full, 1), vec![64, 8]);
        assert_eq!(depth_dims(&full, 2), vec![64, 32, 8]);
        assert_eq!(depth_dims(&full, 3), vec![64, 32, 16, 8]);
        let blocks: Vec<HpBlock> = (0..3)
            .map(|i| HpBlock {
                lr: 0.1,
                m: 0.5,
                b: 10,
                s: i,
                d: None,
                max_epochs: None,
                patience: None,
                enc_act: None,
                dec_act: None,
            })
            .collect();
        let d2 = depth_blocks(&blocks, 2);
        assert_eq!(d2.len(), 2);
        assert_eq!(d2[0].s, 0);
        assert_eq!(d2[1].s, 2);
        let d1 = depth_blocks(&blocks, 1);
        assert_eq!(d1.len(), 1);
        assert_eq!(d1[0].s, 2);
    }
}
