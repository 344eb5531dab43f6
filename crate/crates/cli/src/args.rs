use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jointmap::datasets::{LabelSource, Split};

use crate::config::{EvalLabels, Precision};

#[derive(Debug, Parser)]
#[command(name = "jointmap", version, about = "Joint query intent and product category classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic storefront corpus.
    GenerateCorpus(GenerateArgs),
    /// Label, split and oversample a corpus.
    BuildDatasets(BuildArgs),
    /// Train a model on a built dataset.
    Train(TrainArgs),
    /// Score a checkpoint (and the tf-idf + SVM baseline) on a split.
    Eval(EvalArgs),
    /// Predict intent and categories for queries.
    Predict(PredictArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenerateCorpus(_) => "generate-corpus",
            Command::BuildDatasets(_) => "build-datasets",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Predict(_) => "predict",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::GenerateCorpus(a) => &a.common,
            Command::BuildDatasets(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Predict(a) => &a.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,
    /// A run.json to start from; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n_queries: Option<usize>,
    #[arg(long)]
    pub n_categories: Option<usize>,
    /// Distinct product terms.
    #[arg(long)]
    pub vocab_size: Option<usize>,
    #[arg(long)]
    pub skew: Option<f64>,
    #[arg(long)]
    pub noncommercial_fraction: Option<f64>,
    #[arg(long)]
    pub ambiguity_rate: Option<f64>,
    #[arg(long)]
    pub click_noise: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LabelSourceArg {
    Pipeline,
    Gold,
}

impl From<LabelSourceArg> for LabelSource {
    fn from(a: LabelSourceArg) -> Self {
        match a {
            LabelSourceArg::Pipeline => LabelSource::Pipeline,
            LabelSourceArg::Gold => LabelSource::Gold,
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub common: Common,
    /// Corpus directory.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub label_source: Option<LabelSourceArg>,
    /// Click-rate threshold for category labels.
    #[arg(long = "r")]
    pub click_rate: Option<f64>,
    /// Margin band for relabelling.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Neighbours consulted by the KNN expansion.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub agreement: Option<f64>,
    #[arg(long)]
    pub stop_threshold: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub seed_commercial: Option<usize>,
    #[arg(long)]
    pub seed_noncommercial: Option<usize>,
    /// Non-commercial share of the train split after oversampling.
    #[arg(long, conflicts_with = "no_oversample")]
    pub oversample_target: Option<f64>,
    #[arg(long)]
    pub no_oversample: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub query_len: Option<usize>,
    #[arg(long)]
    pub heads: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Default category threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Per-category thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Per-category focal weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Dataset TSV written by build-datasets.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Text word vectors (`token v1 .. vN` per line) for the embedding.
    #[arg(long)]
    pub word_vectors: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<Split>,
    #[arg(long, value_enum)]
    pub labels: Option<EvalLabels>,
    /// Skip the tf-idf + SVM baseline.
    #[arg(long)]
    pub no_baseline: bool,
    #[arg(long)]
    pub minority_k: Option<usize>,
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// File with one query per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// A query to predict; repeatable.
    #[arg(long = "query")]
    pub queries: Vec<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
}
