//! Thin CLI over the library's command drivers.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage/validation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sbx::commands;

#[derive(Parser)]
#[command(name = "sbx", version, about = "Spectral bottleneck extraction with tied-weight deep denoising auto-encoders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy layer-wise pretraining from a config and frame files.
    Pretrain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        valid: PathBuf,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-layer per-epoch loss CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fine-tune a pretrained model end to end.
    Finetune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "model-in")]
        model_in: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        valid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional per-epoch loss CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Extract bottleneck features from frames.
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct frames through the bottleneck (linear power, warped axis).
    Reconstruct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the originals mapped onto the model's warped axis.
        #[arg(long = "ref-out")]
        ref_out: Option<PathBuf>,
    },
    /// Mean LSD and MSE between two frame files in the same domain.
    Eval {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        reconstruction: PathBuf,
        /// Optional per-frame CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Depth sweep: MSE of 1..L-layer variants with a shared bottleneck.
    ExpDepth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output CSV (depth,seed,train_mse,valid_mse,test_mse).
        #[arg(long)]
        out: PathBuf,
    },
    /// Auto-encoder vs DCT-truncation baseline at equal dimensionality.
    ExpBaseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output CSV (method,k,seed,mean_lsd_db,mean_mse).
        #[arg(long)]
        out: PathBuf,
        /// Directory for test originals and per-method reconstructions.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Generate a deterministic synthetic corpus of spectral envelopes.
    SynthData {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> sbx::Result<()> {
    match cli.command {
        Command::Pretrain {
            config,
            train,
            valid,
            out,
            report,
        } => commands::cmd_pretrain(&config, &train, &valid, &out, report.as_deref()),
        Command::Finetune {
            config,
            model_in,
            train,
            valid,
            out,
            report,
        } => commands::cmd_finetune(
            &config,
            &model_in,
            &train,
            &valid,
            &out,
            report.as_deref(),
        ),
        Command::Encode { model, input, out } => commands::cmd_encode(&model, &input, &out),
        Command::Reconstruct {
            model,
            input,
            out,
            ref_out,
        } => commands::cmd_reconstruct(&model, &input, &out, ref_out.as_deref()),
        Command::Eval {
            original,
            reconstruction,
            report,
        } => commands::cmd_eval(&original, &reconstruction, report.as_deref()).map(|_| ()),
        Command::ExpDepth { config, data, out } => {
            commands::cmd_exp_depth(&config, &data, &out).map(|_| ())
        }
        Command::ExpBaseline {
            config,
            data,
            out,
            dump,
        } => commands::cmd_exp_baseline(&config, &data, &out, dump.as_deref()).map(|_| ()),
        Command::SynthData {
            seed,
            frames,
            bins,
            out,
        } => commands::cmd_synth_data(seed, frames, bins, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
