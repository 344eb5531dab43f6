//! Training and scoring on a corpus plus its labelled dataset.

use jointmap::baseline::{SvmConfig, TextSvm};
use jointmap::corpus::{Corpus, Intent};
use jointmap::datasets::{LabeledDataset, Record, Split};
use jointmap::eval::{count_multi, count_single, minority_report, rarest_classes, MetricsRow};
use jointmap::model::{Example, JointMap, ModelConfig, Scores, TrainConfig, TrainReport, Vocab};
use jointmap::{Result, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::EvalLabels;

/// Record labels used for scoring.
fn labels_of(corpus: &Corpus, r: &Record, source: EvalLabels) -> Result<(Intent, Vec<usize>)> {
    Ok(match source {
        EvalLabels::Dataset => (r.intent, r.categories.clone()),
        EvalLabels::Gold => {
            let g = corpus.oracle_label(r.query_id)?;
            (g.intent, g.categories)
        }
    })
}

pub fn records(ds: &LabeledDataset, split: Split) -> Vec<&Record> {
    ds.split(split).collect()
}

/// Vocabulary of the train split.
pub fn train_vocab(ds: &LabeledDataset) -> Vocab {
    let docs: Vec<&[String]> = ds.split(Split::Train).map(|r| r.tokens.as_slice()).collect();
    Vocab::build(&docs)
}

/// Fresh model sized for `corpus`, trained on the train split with
/// validation-based checkpoint selection.
pub fn train_model<T: Scalar>(
    corpus: &Corpus,
    ds: &LabeledDataset,
    model: &ModelConfig,
    train: &TrainConfig,
    word_vectors: Option<&str>,
    on_epoch: impl FnMut(&jointmap::model::EpochReport),
) -> Result<(JointMap<T>, TrainReport)> {
    let cfg = ModelConfig {
        n_categories: corpus.n_categories(),
        ..model.clone()
    };
    let mut m = JointMap::new(cfg, train_vocab(ds), &mut ChaCha8Rng::seed_from_u64(train.seed))?;
    if let Some(text) = word_vectors {
        m.load_word_vectors(text)?;
    }
    let tr = m.examples(&records(ds, Split::Train))?;
    let val = m.examples(&records(ds, Split::Val))?;
    let report = m.train_with(&tr, &val, train, on_epoch)?;
    Ok((m, report))
}

pub fn eval_examples<T: Scalar>(
    model: &JointMap<T>,
    corpus: &Corpus,
    ds: &LabeledDataset,
    split: Split,
    source: EvalLabels,
) -> Result<Vec<Example>> {
    ds.split(split)
        .map(|r| {
            let (intent, cats) = labels_of(corpus, r, source)?;
            model.example(&r.tokens, intent, &cats)
        })
        .collect()
}

pub fn score_model<T: Scalar>(
    model: &JointMap<T>,
    corpus: &Corpus,
    ds: &LabeledDataset,
    split: Split,
    source: EvalLabels,
) -> Result<Scores> {
    model.score(&eval_examples(model, corpus, ds, split, source)?)
}

/// Tf-idf + linear SVM: a binary intent classifier on the train split and
/// one-vs-rest category classifiers on its commercial records.
pub fn score_svm(
    corpus: &Corpus,
    ds: &LabeledDataset,
    split: Split,
    source: EvalLabels,
    svm: SvmConfig,
    seed: u64,
) -> Result<Scores> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = records(ds, Split::Train);
    let commercial: Vec<&&Record> = train.iter().filter(|r| r.intent == Intent::Commercial).collect();
    let docs: Vec<&[String]> = commercial.iter().map(|r| r.tokens.as_slice()).collect();
    let targets: Vec<Vec<usize>> = commercial.iter().map(|r| r.categories.clone()).collect();
    let cat_svm = TextSvm::fit_one_vs_rest(&docs, &targets, corpus.n_categories(), svm, &mut rng)?;
    let docs: Vec<&[String]> = train.iter().map(|r| r.tokens.as_slice()).collect();
    let y: Vec<bool> = train.iter().map(|r| r.intent == Intent::Commercial).collect();
    let intent_svm = TextSvm::fit_binary(&docs, &y, svm, &mut rng)?;

    let (mut pi, mut gi, mut pc, mut gc) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for r in ds.split(split) {
        let (intent, cats) = labels_of(corpus, r, source)?;
        let commercial = intent_svm.decision(&r.tokens)?[0] > 0.0;
        pi.push(if commercial { Intent::Commercial } else { Intent::NonCommercial }.index());
        gi.push(intent.index());
        if intent == Intent::Commercial {
            pc.push(cat_svm.predict_labels(&r.tokens)?);
            gc.push(cats);
        }
    }
    Ok(Scores {
        intent: count_single(&pi, &gi, 2)?,
        category: count_multi(&pc, &gc, corpus.n_categories())?,
    })
}

/// The `k` categories with the fewest commercial train records.
pub fn minority_classes(ds: &LabeledDataset, n_categories: usize, k: usize) -> Vec<usize> {
    let mut support = vec![0usize; n_categories];
    for r in ds.split(Split::Train).filter(|r| r.intent == Intent::Commercial) {
        for &c in &r.categories {
            support[c] += 1;
        }
    }
    rarest_classes(&support, k)
}

pub fn minority_f1(scores: &Scores, classes: &[usize]) -> Result<f64> {
    minority_report(&scores.category, classes)
}

pub fn metrics_row(method: &str, s: &Scores) -> MetricsRow {
    MetricsRow {
        method: method.to_string(),
        intent_macro_f1: s.intent_macro_f1(),
        intent_micro_f1: s.intent_micro_f1(),
        category_macro_f1: s.category_macro_f1(),
        category_micro_f1: s.category_micro_f1(),
    }
}
