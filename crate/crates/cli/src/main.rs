mod commands;
mod config;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "agreement",
    version,
    about = "Number agreement in LSTM classifiers: corpora, training, stimuli and evaluation"
)]
pub struct Cli {
    /// Pipeline config (TOML). Needed by commands that touch the vocabulary.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for corpus generation, the first replica, or the bootstrap.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Conditions,
    Curve,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample preambles from the grammar into an exchange file.
    GenCorpus {
        #[arg(long, value_enum, default_value = "train")]
        split: Split,
        /// Overrides the split size from the config.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Train an ensemble of replicas and save checkpoints to `--out`.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        /// Replica count; seeds run consecutively from `--seed` (default 1).
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        max_epochs: Option<usize>,
    },
    /// Build a stimulus set for one design from an item-frame file.
    GenStimuli {
        #[arg(long)]
        design: String,
        #[arg(long)]
        frames: PathBuf,
    },
    /// Score an ensemble on stimuli or a held-out corpus.
    Evaluate {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
        stimuli: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "conditions")]
        mode: Mode,
        #[arg(long, default_value_t = agreement_core::evaluation::DEFAULT_RESAMPLES)]
        resamples: usize,
        /// Outlier threshold for Experiment 1 items.
        #[arg(long, default_value_t = agreement_core::evaluation::DEFAULT_EXCLUSION_THRESHOLD)]
        exclude_threshold: f64,
        /// Smallest bin kept on the attractor-count curve.
        #[arg(long, default_value_t = 20)]
        min_n: usize,
    },
    /// Figures and the directional-contrast summary from an evaluation directory.
    Report {
        #[arg(long)]
        stats: PathBuf,
        #[arg(long, default_value_t = agreement_core::evaluation::DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long, default_value_t = agreement_core::evaluation::DEFAULT_ALPHA)]
        alpha: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
