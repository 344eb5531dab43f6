use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    algorithm1_run, algorithm2_run, oversample_minority, split_dataset, ActiveLearningConfig,
    ActiveLearningOutcome, Algorithm2Report, LabeledDataset, PoolQuery, Provenance, Record, Split,
};
use crate::corpus::{Corpus, Intent, LabelOracle};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSource {
    /// Intent labels from active learning, category labels from clicks.
    Pipeline,
    /// Generator gold labels for every query.
    Gold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    pub label_source: LabelSource,
    /// Oracle-labelled commercial seed queries.
    pub seed_commercial: usize,
    /// Oracle-labelled non-commercial seed queries.
    pub seed_noncommercial: usize,
    pub active: ActiveLearningConfig,
    /// Click-rate threshold for category labels.
    pub click_rate: f64,
    /// Non-commercial share of the train split after oversampling.
    pub oversample_target: Option<f64>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            label_source: LabelSource::Pipeline,
            seed_commercial: 200,
            seed_noncommercial: 25,
            active: ActiveLearningConfig::default(),
            click_rate: 0.1,
            oversample_target: Some(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceReport {
    pub label_source: LabelSource,
    pub iterations: usize,
    pub converged: bool,
    pub accuracy_history: Vec<f64>,
    pub labeled_size_history: Vec<usize>,
    pub tricky_per_iteration: Vec<usize>,
    pub provenance_counts: BTreeMap<String, usize>,
    pub unlabeled_dropped: usize,
    pub algorithm2: Algorithm2Report,
    pub split_counts: BTreeMap<String, usize>,
    pub oversampled_added: usize,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub dataset: LabeledDataset,
    pub report: ProvenanceReport,
    pub active: Option<ActiveLearningOutcome>,
}

/// Builds a split, oversampled dataset from a corpus.
pub fn build_datasets(corpus: &Corpus, cfg: &BuildConfig, seed: u64) -> Result<BuildOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProvenanceReport {
        label_source: cfg.label_source,
        iterations: 0,
        converged: true,
        accuracy_history: Vec::new(),
        labeled_size_history: Vec::new(),
        tricky_per_iteration: Vec::new(),
        provenance_counts: BTreeMap::new(),
        unlabeled_dropped: 0,
        algorithm2: Algorithm2Report::default(),
        split_counts: BTreeMap::new(),
        oversampled_added: 0,
    };

    let (records, active) = match cfg.label_source {
        LabelSource::Gold => {
            let records = corpus
                .queries
                .iter()
                .map(|q| Record {
                    record_id: 0,
                    query_id: q.id,
                    tokens: q.tokens.clone(),
                    intent: q.intent,
                    categories: q.categories.clone(),
                    split: Split::Unassigned,
                    provenance: Provenance::Seed,
                })
                .collect::<Vec<_>>();
            (records, None)
        }
        LabelSource::Pipeline => {
            let (records, outcome) = pipeline_labels(corpus, cfg, &mut rng, &mut report)?;
            (records, Some(outcome))
        }
    };

    let mut ds = LabeledDataset::new(records);
    for (i, r) in ds.records.iter_mut().enumerate() {
        r.record_id = i;
    }
    for r in &ds.records {
        let key = serde_json::to_value(r.provenance)?
            .as_str()
            .unwrap_or_default()
            .to_string();
        *report.provenance_counts.entry(key).or_default() += 1;
    }

    let mut ds = split_dataset(&ds, rng.gen())?;
    if let Some(target) = cfg.oversample_target {
        let before = ds.len();
        ds = oversample_minority(&ds, target, &mut rng)?;
        report.oversampled_added = ds.len() - before;
    }
    for s in [Split::Train, Split::Val, Split::Test] {
        report.split_counts.insert(s.to_string(), ds.count(s, None));
    }
    Ok(BuildOutput {
        dataset: ds,
        report,
        active,
    })
}

fn pipeline_labels(
    corpus: &Corpus,
    cfg: &BuildConfig,
    rng: &mut ChaCha8Rng,
    report: &mut ProvenanceReport,
) -> Result<(Vec<Record>, ActiveLearningOutcome)> {
    // Curated seed: a few oracle-labelled queries of each intent.
    let mut seed = Vec::new();
    for intent in Intent::ALL {
        let mut ids: Vec<_> = corpus
            .queries
            .iter()
            .filter(|q| corpus.label(q.id).map(|g| g.intent == intent).unwrap_or(false))
            .map(|q| q.id)
            .collect();
        ids.shuffle(rng);
        ids.truncate(match intent {
            Intent::Commercial => cfg.seed_commercial,
            Intent::NonCommercial => cfg.seed_noncommercial,
        });
        ids.sort_unstable();
        seed.extend(ids.into_iter().map(|id| (id, intent)));
    }
    let seeded: HashMap<_, _> = seed.iter().copied().collect();
    let seed_set: Vec<(PoolQuery, Intent)> = seed
        .iter()
        .map(|&(id, l)| {
            let q = corpus.query(id).expect("seed id from corpus");
            (
                PoolQuery {
                    query_id: id,
                    tokens: q.tokens.clone(),
                },
                l,
            )
        })
        .collect();
    let pool: Vec<PoolQuery> = corpus
        .queries
        .iter()
        .filter(|q| !seeded.contains_key(&q.id))
        .map(|q| PoolQuery {
            query_id: q.id,
            tokens: q.tokens.clone(),
        })
        .collect();

    let outcome = algorithm1_run(&seed_set, &pool, corpus, &cfg.active, rng)?;
    report.iterations = outcome.state.iteration;
    report.converged = outcome.converged;
    report.accuracy_history = outcome.state.accuracy_history.clone();
    report.labeled_size_history = outcome.state.size_history.clone();
    report.tricky_per_iteration = outcome.state.tricky_history.iter().map(Vec::len).collect();
    report.unlabeled_dropped = outcome.unlabeled.len();

    // The held-out set is oracle-labelled and joins the data as seed.
    let mut records = outcome.dataset.records.clone();
    for &(id, intent) in &outcome.state.test {
        records.push(Record {
            record_id: 0,
            query_id: id,
            tokens: corpus.query(id).expect("test id from corpus").tokens.clone(),
            intent,
            categories: Vec::new(),
            split: Split::Unassigned,
            provenance: Provenance::Seed,
        });
    }

    let commercial: Vec<_> = records
        .iter()
        .filter(|r| r.intent == Intent::Commercial)
        .map(|r| r.query_id)
        .collect();
    let alg2 = algorithm2_run(&commercial, &corpus.clicks, &corpus.taxonomy, cfg.click_rate)?;
    report.algorithm2 = alg2.report;
    let cats: HashMap<_, _> = alg2.labels.into_iter().collect();
    let records = records
        .into_iter()
        .filter_map(|mut r| match r.intent {
            Intent::NonCommercial => Some(r),
            Intent::Commercial => cats.get(&r.query_id).map(|c| {
                r.categories = c.clone();
                r
            }),
        })
        .collect();
    Ok((records, outcome))
}
