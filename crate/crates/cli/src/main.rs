use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use paygan::data::Split;
use paygan_cli::commands::{self, DetectArgs, EvalArgs, GenDataArgs, TrainArgs};
use paygan_cli::exit_code;

/// Synthetic payment-image corpus, GAN training and discriminator-based fake detection.
///
/// Exit codes: 0 ok, 1 fake detected, 2 I/O, 3 config, 4 data, 5 numeric, 6 checkpoint version.
#[derive(Parser)]
#[command(name = "paygan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the labeled corpus as PGM files plus manifest.json.
    GenData {
        /// JSON run configuration (defaults apply when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides corpus.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Corpus directory (default: output.dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the GAN on a corpus and write checkpoint.bin and trace.csv.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Corpus directory written by gen-data.
        #[arg(long)]
        data: PathBuf,
        /// Overrides train.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides train.iterations (the total, also when resuming).
        #[arg(long)]
        iterations: Option<u64>,
        /// Continue from this checkpoint instead of a fresh model.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Run directory (default: output.dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a corpus split and write JSON/CSV metric reports.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        /// Real-probability threshold (default: the checkpoint's train.threshold).
        #[arg(long)]
        threshold: Option<f64>,
        /// Seed for the generator samples scored alongside the split (default: train.seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Report directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print `<path>\t<score>\t<real|fake>` for each PGM image.
    Detect {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        /// Directory for the effective-config sidecar (printed to stderr when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        images: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData { config, seed, out } => commands::gen_data(&GenDataArgs { config, seed, out }),
        Command::Train {
            config,
            data,
            seed,
            iterations,
            resume,
            out,
        } => commands::train(&TrainArgs {
            config,
            data,
            seed,
            iterations,
            resume,
            out,
        }),
        Command::Eval {
            checkpoint,
            data,
            split,
            threshold,
            seed,
            out,
        } => commands::eval(&EvalArgs {
            checkpoint,
            data,
            split,
            threshold,
            seed,
            out,
        }),
        Command::Detect {
            checkpoint,
            threshold,
            out,
            images,
        } => commands::detect(&DetectArgs {
            checkpoint,
            images,
            threshold,
            out,
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("paygan: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
