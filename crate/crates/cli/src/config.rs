use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jointmap::corpus::CorpusConfig;
use jointmap::datasets::{BuildConfig, Split};
use jointmap::model::{ModelConfig, TrainConfig};
use serde::{Deserialize, Serialize};

pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F32,
    F64,
}

/// Which labels the evaluation split is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvalLabels {
    /// Generator gold labels looked up in the corpus.
    Gold,
    /// Labels stored in the dataset file.
    Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub split: Split,
    pub labels: EvalLabels,
    /// Also score the tf-idf + SVM baseline.
    pub baseline: bool,
    /// Number of rarest train categories in the minority report.
    pub minority_k: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            split: Split::Test,
            labels: EvalLabels::Gold,
            baseline: true,
            minority_k: 3,
        }
    }
}

/// Fully resolved settings of one CLI run, echoed to `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub corpus: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub input: Option<PathBuf>,
    /// Queries given on the command line, predicted after `input`.
    pub queries: Vec<String>,
    pub word_vectors: Option<PathBuf>,
    /// Overrides the checkpoint's default category threshold in `predict`.
    pub predict_threshold: Option<f64>,
    pub precision: Precision,
    pub generate: CorpusConfig,
    pub build: BuildConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            seed: 0,
            threads: None,
            out: PathBuf::from("out"),
            corpus: None,
            dataset: None,
            checkpoint: None,
            input: None,
            queries: Vec::new(),
            word_vectors: None,
            predict_threshold: None,
            precision: Precision::F64,
            generate: CorpusConfig::desk(0),
            build: BuildConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Base config for `command`: the file when given, else defaults.
    pub fn base(command: &str, file: Option<&Path>) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if !cfg.command.is_empty() && cfg.command != command {
            bail!(jointmap::Error::Config(format!("config was written by '{}', not '{command}'", cfg.command)));
        }
        cfg.command = command.to_string();
        Ok(cfg)
    }

    /// Propagates the run seed into the sections that carry their own.
    pub fn finish(&mut self) {
        self.generate.seed = self.seed;
        self.train.seed = self.seed;
    }

    pub fn write(&self) -> Result<()> {
        fs::create_dir_all(&self.out)?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(self.out.join(RUN_FILE), text)?;
        Ok(())
    }

    pub fn require<'a>(&self, field: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        match field {
            Some(p) => Ok(p),
            None => bail!("missing required --{flag}"),
        }
    }
}
