mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isoforge::eval::{Method, TaskKind};
use isoforge::trainer::TrainConfig;

/// Embedding anisotropy diagnostics and dominant-direction post-processing.
#[derive(Debug, Parser)]
#[command(name = "isoforge", version, about)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, env = "ISOFORGE_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Anisotropy report: mean vector, norms, average cosine, spectrum and
    /// frequency correlations.
    Diagnose(DiagnoseArgs),
    /// Fit per-direction removal weights on word-similarity pairs.
    Fit(FitArgs),
    /// Write a post-processed copy of an embedding matrix.
    Apply(ApplyArgs),
    /// Score one method on the datasets of a manifest.
    Eval(EvalArgs),
    /// Score methods over a list of d values.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Embedding matrix in text format.
    #[arg(long)]
    pub embedding: PathBuf,
    /// Token counts ("token count" per line); enables frequency correlations.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Take the spectrum and principal directions from the mean-centered matrix.
    #[arg(long)]
    pub center: bool,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = TrainConfig::DEFAULT_LEARNING_RATE)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = TrainConfig::DEFAULT_EPOCHS)]
    pub epochs: usize,
    /// Mini-batch size (default: full batch).
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long, default_value_t = TrainConfig::DEFAULT_INIT_ALPHA)]
    pub init_alpha: f64,
    /// Share of the pooled similarity pairs used for training.
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Seed for the train/test split and mini-batch order.
    #[arg(long, default_value_t = TrainConfig::DEFAULT_SEED)]
    pub seed: u64,
}

impl TrainArgs {
    pub fn config(&self, d: usize) -> TrainConfig {
        TrainConfig {
            d,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch: self.batch,
            seed: self.seed,
            init_alpha: self.init_alpha,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Dataset manifest; its similarity datasets supply the training pairs.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Number of directions to weight.
    #[arg(long)]
    pub d: usize,
    /// Fit weights for directions of the mean-centered matrix.
    #[arg(long)]
    pub center: bool,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Orig,
    Wr,
    Abtt,
    Cn,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Orig => Method::Orig,
            MethodArg::Wr => Method::Wr,
            MethodArg::Abtt => Method::Abtt,
            MethodArg::Cn => Method::Cn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Similarity,
    Analogy,
    Sts,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Similarity => TaskKind::Similarity,
            TaskArg::Analogy => TaskKind::Analogy,
            TaskArg::Sts => TaskKind::Sts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TokenizationArg {
    /// Pretokenized files where the manifest lists them, basic otherwise.
    Auto,
    Basic,
    Pretokenized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    /// Score every similarity pair.
    All,
    /// Score only the held-out pairs.
    Test,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    /// Removal model from `fit` (WR).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Number of directions (ABTT, or WR when fitting on the fly).
    #[arg(long)]
    pub d: Option<usize>,
    /// Subtract the mean vector before ABTT.
    #[arg(long)]
    pub remove_mean: bool,
    /// Use directions of the mean-centered matrix.
    #[arg(long)]
    pub center: bool,
    /// Conceptor aperture (CN).
    #[arg(long, default_value_t = 2.0)]
    pub aperture: f64,
    /// Apply a model to a matrix other than the one it was fitted on.
    #[arg(long)]
    pub override_fingerprint: bool,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long, value_enum, default_value = "wr")]
    pub method: MethodArg,
    #[command(flatten)]
    pub transform: TransformArgs,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "embedding.txt")]
    pub output: String,
}

#[derive(Debug, Clone, Args)]
pub struct EvalData {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Tasks to score (default: every task present in the manifest).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub task: Vec<TaskArg>,
    #[arg(long, value_enum, default_value = "auto")]
    pub tokenization: TokenizationArg,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long, value_enum, default_value = "orig")]
    pub method: MethodArg,
    #[command(flatten)]
    pub transform: TransformArgs,
    #[command(flatten)]
    pub data: EvalData,
    /// Which similarity pairs are scored.
    #[arg(long, value_enum, default_value = "all")]
    pub eval_split: SplitArg,
    /// Add a similarity row pooling every dataset.
    #[arg(long)]
    pub pooled: bool,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Comma-separated d values, e.g. 1,5,20.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
    /// Comma-separated methods.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "orig,wr,abtt,cn")]
    pub method: Vec<MethodArg>,
    #[arg(long)]
    pub remove_mean: bool,
    #[arg(long)]
    pub center: bool,
    #[arg(long, default_value_t = 2.0)]
    pub aperture: f64,
    #[command(flatten)]
    pub data: EvalData,
    /// Which similarity pairs are scored.
    #[arg(long, value_enum, default_value = "test")]
    pub eval_split: SplitArg,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: configuring {n} threads: {e}");
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
