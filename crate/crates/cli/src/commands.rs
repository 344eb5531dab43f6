use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jointmap::corpus::{generate_corpus, read_corpus, tokenize, write_corpus, Corpus};
use jointmap::datasets::{build_datasets, read_dataset, write_dataset, write_provenance, LabeledDataset};
use jointmap::eval::write_metrics_tsv;
use jointmap::model::{load_checkpoint, save_checkpoint, write_report_jsonl, JointMap, ModelConfig};
use jointmap::Scalar;
use serde::Serialize;

use crate::args::{BuildArgs, Command, EvalArgs, GenerateArgs, ModelArgs, PredictArgs, TrainArgs};
use crate::config::{Precision, RunConfig};
use crate::experiment;

pub const DATASET_FILE: &str = "dataset.tsv";
pub const PROVENANCE_FILE: &str = "provenance.json";
pub const CHECKPOINT_FILE: &str = "model.jmap";
pub const REPORT_FILE: &str = "report.jsonl";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const MINORITY_FILE: &str = "minority.json";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, v: &Option<PathBuf>) {
    if v.is_some() {
        slot.clone_from(v);
    }
}

/// Resolves flags over the optional `--config` file.
pub fn resolve(command: &Command) -> Result<RunConfig> {
    let common = command.common();
    let mut cfg = RunConfig::base(command.name(), common.config.as_deref())?;
    set(&mut cfg.seed, common.seed);
    set(&mut cfg.out, common.out.clone());
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    match command {
        Command::GenerateCorpus(a) => resolve_generate(&mut cfg, a),
        Command::BuildDatasets(a) => resolve_build(&mut cfg, a),
        Command::Train(a) => resolve_train(&mut cfg, a),
        Command::Eval(a) => resolve_eval(&mut cfg, a),
        Command::Predict(a) => resolve_predict(&mut cfg, a),
    }
    cfg.finish();
    Ok(cfg)
}

fn resolve_generate(cfg: &mut RunConfig, a: &GenerateArgs) {
    let g = &mut cfg.generate;
    set(&mut g.n_queries, a.n_queries);
    set(&mut g.n_categories, a.n_categories);
    set(&mut g.vocab_size, a.vocab_size);
    set(&mut g.skew, a.skew);
    set(&mut g.noncommercial_fraction, a.noncommercial_fraction);
    set(&mut g.ambiguity_rate, a.ambiguity_rate);
    set(&mut g.click_noise, a.click_noise);
}

fn resolve_build(cfg: &mut RunConfig, a: &BuildArgs) {
    set_path(&mut cfg.corpus, &a.corpus);
    let b = &mut cfg.build;
    set(&mut b.label_source, a.label_source.map(Into::into));
    set(&mut b.click_rate, a.click_rate);
    set(&mut b.active.tau, a.tau);
    set(&mut b.active.k, a.k);
    set(&mut b.active.agreement, a.agreement);
    set(&mut b.active.stop_threshold, a.stop_threshold);
    set(&mut b.active.max_iters, a.max_iters);
    set(&mut b.seed_commercial, a.seed_commercial);
    set(&mut b.seed_noncommercial, a.seed_noncommercial);
    if a.oversample_target.is_some() {
        b.oversample_target = a.oversample_target;
    }
    if a.no_oversample {
        b.oversample_target = None;
    }
}

fn resolve_model(m: &mut ModelConfig, a: &ModelArgs) {
    set(&mut m.gamma, a.gamma);
    set(&mut m.beta1, a.beta1);
    set(&mut m.beta2, a.beta2);
    set(&mut m.embed_dim, a.embed_dim);
    set(&mut m.query_len, a.query_len);
    set(&mut m.heads, a.heads);
    set(&mut m.dropout, a.dropout);
    set(&mut m.default_threshold, a.threshold);
    set(&mut m.thresholds, a.thresholds.clone());
    set(&mut m.alpha, a.alpha.clone());
}

fn resolve_train(cfg: &mut RunConfig, a: &TrainArgs) {
    set_path(&mut cfg.corpus, &a.corpus);
    set_path(&mut cfg.dataset, &a.dataset);
    set_path(&mut cfg.word_vectors, &a.word_vectors);
    resolve_model(&mut cfg.model, &a.model);
    set(&mut cfg.train.epochs, a.epochs);
    set(&mut cfg.train.batch_size, a.batch_size);
    set(&mut cfg.train.learning_rate, a.lr);
    set(&mut cfg.precision, a.precision);
}

fn resolve_eval(cfg: &mut RunConfig, a: &EvalArgs) {
    set_path(&mut cfg.corpus, &a.corpus);
    set_path(&mut cfg.dataset, &a.dataset);
    set_path(&mut cfg.checkpoint, &a.checkpoint);
    set(&mut cfg.eval.split, a.split);
    set(&mut cfg.eval.labels, a.labels);
    set(&mut cfg.eval.minority_k, a.minority_k);
    if a.no_baseline {
        cfg.eval.baseline = false;
    }
    set(&mut cfg.precision, a.precision);
}

fn resolve_predict(cfg: &mut RunConfig, a: &PredictArgs) {
    set_path(&mut cfg.checkpoint, &a.checkpoint);
    set_path(&mut cfg.input, &a.input);
    if !a.queries.is_empty() {
        cfg.queries.clone_from(&a.queries);
    }
    if a.threshold.is_some() {
        cfg.predict_threshold = a.threshold;
    }
    set(&mut cfg.precision, a.precision);
}

/// Runs a resolved command.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    match cfg.command.as_str() {
        "generate-corpus" => cmd_generate_corpus(cfg),
        "build-datasets" => cmd_build_datasets(cfg),
        "train" => dispatch(cfg, cmd_train::<f32>, cmd_train::<f64>),
        "eval" => dispatch(cfg, cmd_eval::<f32>, cmd_eval::<f64>),
        "predict" => dispatch(cfg, cmd_predict::<f32>, cmd_predict::<f64>),
        other => bail!("unknown command '{other}'"),
    }
}

fn dispatch(
    cfg: &RunConfig,
    narrow: fn(&RunConfig) -> Result<()>,
    wide: fn(&RunConfig) -> Result<()>,
) -> Result<()> {
    match cfg.precision {
        Precision::F32 => narrow(cfg),
        Precision::F64 => wide(cfg),
    }
}

fn load_corpus(cfg: &RunConfig) -> Result<Corpus> {
    let dir = cfg.require(&cfg.corpus, "corpus")?;
    read_corpus(dir).with_context(|| format!("reading corpus {}", dir.display()))
}

fn load_dataset(cfg: &RunConfig, corpus: &Corpus) -> Result<LabeledDataset> {
    let path = cfg.require(&cfg.dataset, "dataset")?;
    read_dataset(path, corpus).with_context(|| format!("reading dataset {}", path.display()))
}

fn load_model<T: Scalar>(cfg: &RunConfig) -> Result<JointMap<T>> {
    let path = cfg.require(&cfg.checkpoint, "checkpoint")?;
    load_checkpoint(path).with_context(|| format!("reading checkpoint {}", path.display()))
}

pub fn cmd_generate_corpus(cfg: &RunConfig) -> Result<()> {
    let corpus = generate_corpus(&cfg.generate)?;
    cfg.write()?;
    write_corpus(&cfg.out, &corpus)?;
    Ok(())
}

pub fn cmd_build_datasets(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let out = build_datasets(&corpus, &cfg.build, cfg.seed)?;
    cfg.write()?;
    write_dataset(&cfg.out.join(DATASET_FILE), &out.dataset)?;
    write_provenance(&cfg.out.join(PROVENANCE_FILE), &out.report)?;
    Ok(())
}

pub fn cmd_train<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let ds = load_dataset(cfg, &corpus)?;
    let vectors = match &cfg.word_vectors {
        Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let mut resolved = cfg.clone();
    resolved.model.n_categories = corpus.n_categories();
    resolved.write()?;
    let (model, report) = experiment::train_model::<T>(
        &corpus,
        &ds,
        &resolved.model,
        &resolved.train,
        vectors.as_deref(),
        |e| {
            eprintln!(
                "epoch {} loss {:.6} val intent {:.4} category {:.4}",
                e.epoch, e.train_loss, e.val_macro_f1_intent, e.val_macro_f1_category
            )
        },
    )?;
    save_checkpoint(&cfg.out.join(CHECKPOINT_FILE), &model)?;
    write_report_jsonl(&cfg.out.join(REPORT_FILE), &report.epochs)?;
    Ok(())
}

#[derive(Serialize)]
struct MinorityReport {
    classes: Vec<usize>,
    macro_f1: Vec<(String, f64)>,
}

pub fn cmd_eval<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let ds = load_dataset(cfg, &corpus)?;
    let model = load_model::<T>(cfg)?;
    if model.config().n_categories != corpus.n_categories() {
        bail!(jointmap::Error::Config(format!(
            "checkpoint has {} categories, corpus has {}",
            model.config().n_categories,
            corpus.n_categories()
        )));
    }
    cfg.write()?;
    let e = &cfg.eval;
    let mut methods = vec![(
        "jointmap",
        experiment::score_model(&model, &corpus, &ds, e.split, e.labels)?,
    )];
    if e.baseline {
        let svm = cfg.build.active.svm;
        methods.push(("tfidf-svm", experiment::score_svm(&corpus, &ds, e.split, e.labels, svm, cfg.seed)?));
    }
    let rows: Vec<_> = methods.iter().map(|(m, s)| experiment::metrics_row(m, s)).collect();
    write_metrics_tsv(&cfg.out.join(METRICS_FILE), &rows)?;
    let classes = experiment::minority_classes(&ds, corpus.n_categories(), e.minority_k);
    let report = MinorityReport {
        macro_f1: methods
            .iter()
            .map(|(m, s)| Ok((m.to_string(), experiment::minority_f1(s, &classes)?)))
            .collect::<Result<_>>()?,
        classes,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(cfg.out.join(MINORITY_FILE), text)?;
    Ok(())
}

fn read_queries(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

pub fn cmd_predict<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let mut model = load_model::<T>(cfg)?;
    if let Some(t) = cfg.predict_threshold {
        let mc = ModelConfig {
            default_threshold: t,
            thresholds: Vec::new(),
            ..model.config().clone()
        };
        model.set_config(mc)?;
    }
    let mut queries = match &cfg.input {
        Some(p) => read_queries(p)?,
        None => Vec::new(),
    };
    queries.extend(cfg.queries.iter().cloned());
    if queries.is_empty() {
        bail!(jointmap::Error::Input("no queries given, use --input or --query".into()));
    }
    cfg.write()?;
    let mut out = fs::File::create(cfg.out.join(PREDICTIONS_FILE))?;
    writeln!(out, "query\tintent\tcategory_ids\tcommercial_prob\tcategory_scores")?;
    for q in &queries {
        let tokens = tokenize(q);
        if tokens.is_empty() {
            continue;
        }
        let p = model.predict(&tokens)?;
        let cats: Vec<String> = p.categories.iter().map(ToString::to_string).collect();
        let scores: Vec<String> = p.category_scores.iter().map(|s| format!("{s:.6}")).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}",
            tokens.join(" "),
            p.intent,
            cats.join(","),
            p.intent_probs[0],
            scores.join(",")
        )?;
    }
    Ok(())
}
