//! Synthetic storefront: taxonomy, labelled queries and a click log.
//!
//! Every generated query carries its gold intent and category set, so the
//! corpus doubles as the labelling oracle for the dataset builders.

mod generator;
pub(crate) mod io;
mod vocab;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generator::generate_corpus;
pub use io::{
    read_clicks, read_corpus, read_queries, read_taxonomy, write_clicks, write_corpus, write_queries,
    write_taxonomy, CLICKS_FILE, QUERIES_FILE, TAXONOMY_FILE,
};

pub type CategoryId = usize;
pub type QueryId = usize;
pub type ProductId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Intent {
    Commercial,
    NonCommercial,
}

impl Intent {
    pub const ALL: [Intent; 2] = [Intent::Commercial, Intent::NonCommercial];

    /// Position in the intent label space (and in the intent logits).
    pub fn index(self) -> usize {
        match self {
            Intent::Commercial => 0,
            Intent::NonCommercial => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Intent> {
        Intent::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Intent::Commercial => "commercial",
            Intent::NonCommercial => "non-commercial",
        }
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Intent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "commercial" => Ok(Intent::Commercial),
            "non-commercial" => Ok(Intent::NonCommercial),
            other => Err(format!("unknown intent '{other}'")),
        }
    }
}

/// Lowercased whitespace tokenization shared by every consumer.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(|t| t.to_lowercase()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub id: CategoryId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub pid: ProductId,
    pub tokens: Vec<String>,
    pub categories: Vec<CategoryId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Taxonomy {
    pub categories: Vec<Category>,
    pub products: Vec<Product>,
}

impl Taxonomy {
    pub fn product(&self, pid: ProductId) -> Option<&Product> {
        // pids are dense after generation, fall back to a scan otherwise
        match self.products.get(pid) {
            Some(p) if p.pid == pid => Some(p),
            _ => self.products.iter().find(|p| p.pid == pid),
        }
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for (i, c) in self.categories.iter().enumerate() {
            if c.id != i {
                return Err(Error::Format(format!(
                    "category ids must be 0..n in order, found {} at position {i}",
                    c.id
                )));
            }
        }
        for p in &self.products {
            if p.categories.is_empty() {
                return Err(Error::Format(format!("product {} has no category", p.pid)));
            }
            if let Some(c) = p.categories.iter().find(|&&c| c >= self.categories.len()) {
                return Err(Error::Format(format!(
                    "product {} references unknown category {c}",
                    p.pid
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub id: QueryId,
    pub text: String,
    pub tokens: Vec<String>,
    pub intent: Intent,
    /// Sorted; empty iff the query is non-commercial.
    pub categories: Vec<CategoryId>,
    /// Generator flag for near-boundary queries. Not persisted.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClickRecord {
    pub query_id: QueryId,
    pub pid: ProductId,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClickLog {
    pub records: Vec<ClickRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub n_categories: usize,
    /// Number of distinct product terms across all categories.
    pub vocab_size: usize,
    pub n_queries: usize,
    pub noncommercial_fraction: f64,
    /// Power-law exponent of the category frequency distribution.
    pub skew: f64,
    pub seed: u64,
    /// Fraction of each intent class generated in near-boundary form.
    pub ambiguity_rate: f64,
    /// Probability that a single click lands on a random product.
    pub click_noise: f64,
    /// Probability that a product term is also listed under a second,
    /// more popular category.
    pub secondary_rate: f64,
    /// Share of commercial queries naming only a brand.
    pub brand_only_rate: f64,
    pub clicks_min: u64,
    pub clicks_max: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            n_categories: 32,
            vocab_size: 192,
            n_queries: 195_000,
            noncommercial_fraction: 0.015,
            skew: 1.0,
            seed: 0,
            ambiguity_rate: 0.05,
            click_noise: 0.05,
            secondary_rate: 0.15,
            brand_only_rate: 0.08,
            clicks_min: 10,
            clicks_max: 40,
        }
    }
}

impl CorpusConfig {
    /// Small corpus used for desk-scale runs and tests.
    pub fn desk(seed: u64) -> Self {
        Self {
            n_categories: 8,
            vocab_size: 48,
            n_queries: 5_000,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_categories == 0 || self.n_queries == 0 {
            return Err(Error::Config("category and query counts must be at least 1".into()));
        }
        if self.vocab_size < self.n_categories {
            return Err(Error::Config(format!(
                "vocabulary of {} product terms is too small for {} categories",
                self.vocab_size, self.n_categories
            )));
        }
        for (name, v) in [
            ("noncommercial_fraction", self.noncommercial_fraction),
            ("ambiguity_rate", self.ambiguity_rate),
            ("click_noise", self.click_noise),
            ("secondary_rate", self.secondary_rate),
            ("brand_only_rate", self.brand_only_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if !(self.skew >= 0.0 && self.skew.is_finite()) {
            return Err(Error::Config(format!("skew exponent {} must be >= 0", self.skew)));
        }
        if self.clicks_min == 0 || self.clicks_min > self.clicks_max {
            return Err(Error::Config("click range must satisfy 1 <= min <= max".into()));
        }
        Ok(())
    }
}

/// Gold labels for one query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldLabel {
    pub intent: Intent,
    pub categories: Vec<CategoryId>,
}

/// Source of ground-truth labels, standing in for a human annotator.
pub trait LabelOracle {
    fn label(&self, id: QueryId) -> Result<GoldLabel>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub taxonomy: Taxonomy,
    pub queries: Vec<Query>,
    pub clicks: ClickLog,
    index: HashMap<QueryId, usize>,
}

impl Corpus {
    pub fn new(taxonomy: Taxonomy, queries: Vec<Query>, clicks: ClickLog) -> Result<Self> {
        taxonomy.validate()?;
        let mut index = HashMap::with_capacity(queries.len());
        for (i, q) in queries.iter().enumerate() {
            if index.insert(q.id, i).is_some() {
                return Err(Error::Format(format!("duplicate query id {}", q.id)));
            }
            if q.tokens.is_empty() {
                return Err(Error::Format(format!("query {} has no tokens", q.id)));
            }
            if (q.intent == Intent::NonCommercial) != q.categories.is_empty() {
                return Err(Error::Format(format!(
                    "query {} must have categories iff it is commercial",
                    q.id
                )));
            }
        }
        for r in &clicks.records {
            if taxonomy.product(r.pid).is_none() {
                return Err(Error::Format(format!("click on unknown product {}", r.pid)));
            }
        }
        Ok(Self {
            taxonomy,
            queries,
            clicks,
            index,
        })
    }

    pub fn query(&self, id: QueryId) -> Option<&Query> {
        self.index.get(&id).map(|&i| &self.queries[i])
    }

    pub fn n_categories(&self) -> usize {
        self.taxonomy.n_categories()
    }

    /// Gold labels of a generated query; always correct by construction.
    pub fn oracle_label(&self, id: QueryId) -> Result<GoldLabel> {
        let q = self
            .query(id)
            .ok_or_else(|| Error::Lookup(format!("unknown query id {id}")))?;
        Ok(GoldLabel {
            intent: q.intent,
            categories: q.categories.clone(),
        })
    }
}

impl LabelOracle for Corpus {
    fn label(&self, id: QueryId) -> Result<GoldLabel> {
        self.oracle_label(id)
    }
}
