//! Labelled datasets: active-learning intent labels, click-rate category
//! labels, minority oversampling and the stratified split.

mod active;
mod clicks;
mod io;
mod pipeline;
mod sampling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CategoryId, Intent, QueryId};

pub use active::{
    algorithm1_run, find_tricky_samples, knn_expand, ActiveLearningConfig, ActiveLearningOutcome,
    ActiveLearningState, PoolQuery,
};
pub use clicks::{algorithm2_run, Algorithm2Output, Algorithm2Report};
pub use io::{read_dataset, write_dataset, write_provenance, DATASET_HEADER};
pub use pipeline::{build_datasets, BuildConfig, BuildOutput, LabelSource, ProvenanceReport};
pub use sampling::{oversample_minority, split_dataset, SPLIT_FRACTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Train,
    Val,
    Test,
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            "unassigned" => Ok(Split::Unassigned),
            other => Err(format!("unknown split '{other}'")),
        }
    }
}

/// Where a record's intent label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Seed,
    Knn,
    OracleRelabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub record_id: usize,
    pub query_id: QueryId,
    pub tokens: Vec<String>,
    pub intent: Intent,
    /// Sorted; empty for non-commercial records.
    pub categories: Vec<CategoryId>,
    pub split: Split,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledDataset {
    pub records: Vec<Record>,
}

impl LabeledDataset {
    pub fn new(records: Vec<Record>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn count(&self, split: Split, intent: Option<Intent>) -> usize {
        self.split(split)
            .filter(|r| intent.map_or(true, |i| r.intent == i))
            .count()
    }

    pub fn next_record_id(&self) -> usize {
        self.records.iter().map(|r| r.record_id + 1).max().unwrap_or(0)
    }
}
