//! The joint intent and category network.
//!
//! Word and label embeddings meet in a label-word cosine matrix, which a
//! multi-head self-attention over labels refines. Each task pools its own
//! highway-transformed token embeddings with weights taken from the
//! attention output, then scores labels with a linear head.

mod checkpoint;
mod config;
pub mod loss;
mod network;
mod train;
mod vocab;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC};
pub use config::ModelConfig;
pub use network::{Example, ForwardTrace, PathTrace, RecordLoss};
pub use train::{read_report_jsonl, write_report_jsonl, EpochReport, TrainConfig, TrainReport};
pub use vocab::{Vocab, UNK, UNK_TOKEN};

use crate::corpus::Intent;
use crate::datasets::Record;
use crate::error::{Error, Result};
use crate::eval::{count_multi, count_single, f1_macro, f1_micro, PerClassCounts};
use crate::numerics::{check_gradients, sigmoid_scalar, GradCheckReport, Gradients, Matrix, ParamStore};
use crate::scalar::Scalar;
use network::Layout;

/// Records per work unit in batched passes. Fixed so that results do not
/// depend on the thread count.
pub const CHUNK: usize = 8;

#[derive(Debug, Clone)]
pub struct JointMap<T> {
    config: ModelConfig,
    vocab: Vocab,
    store: ParamStore<T>,
    layout: Layout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub intent: Intent,
    /// Softmax over the intent logits, indexed by `Intent::index`.
    pub intent_probs: [f64; 2],
    /// Sigmoid score per category.
    pub category_scores: Vec<f64>,
    /// Categories above threshold, whatever the predicted intent.
    pub raw_categories: Vec<usize>,
    /// `raw_categories` when the intent is commercial, else empty.
    pub categories: Vec<usize>,
}

impl<T: Scalar> JointMap<T> {
    /// Fresh randomly initialised network. `config.vocab_size` is taken
    /// from `vocab`.
    pub fn new<R: Rng + ?Sized>(mut config: ModelConfig, vocab: Vocab, rng: &mut R) -> Result<Self> {
        config.vocab_size = vocab.len();
        config.validate()?;
        let mut store = ParamStore::new();
        let layout = Layout::register(&config, &mut store);
        layout.initialize(&config, &mut store, rng);
        Ok(Self {
            config,
            vocab,
            store,
            layout,
        })
    }

    /// Network with the given parameter values, in declaration order.
    pub fn from_parts(config: ModelConfig, vocab: Vocab, values: Vec<Matrix<T>>) -> Result<Self> {
        if config.vocab_size != vocab.len() {
            return Err(Error::Consistency(format!(
                "config vocabulary size {} but {} tokens",
                config.vocab_size,
                vocab.len()
            )));
        }
        config.validate()?;
        let mut store = ParamStore::new();
        let layout = Layout::register(&config, &mut store);
        store.restore_values(values)?;
        Ok(Self {
            config,
            vocab,
            store,
            layout,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    /// Changes loss weights and decision thresholds. The architecture
    /// fields must stay the same.
    pub fn set_config(&mut self, config: ModelConfig) -> Result<()> {
        config.validate()?;
        let arch = |c: &ModelConfig| {
            (c.vocab_size, c.embed_dim, c.query_len, c.n_categories, c.n_intents, c.heads)
        };
        if arch(&config) != arch(&self.config) {
            return Err(Error::Config("architecture fields cannot change".into()));
        }
        self.config = config;
        Ok(())
    }

    /// Token ids of a query, truncated to the query length.
    pub fn encode(&self, tokens: &[String]) -> Result<Vec<usize>> {
        self.vocab.encode(tokens, self.config.query_len)
    }

    pub fn example(&self, tokens: &[String], intent: Intent, categories: &[usize]) -> Result<Example> {
        Ok(Example {
            ids: self.encode(tokens)?,
            intent: intent.index(),
            categories: categories.to_vec(),
        })
    }

    pub fn examples(&self, records: &[&Record]) -> Result<Vec<Example>> {
        records
            .iter()
            .map(|r| self.example(&r.tokens, r.intent, &r.categories))
            .collect()
    }

    /// Full forward pass. Dropout is active only when `training`.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        ids: &[usize],
        training: bool,
        rng: &mut R,
    ) -> Result<ForwardTrace<T>> {
        self.layout.forward(&self.config, &self.store, ids, training, rng)
    }

    /// Eval-mode forward pass.
    pub fn infer(&self, ids: &[usize]) -> Result<ForwardTrace<T>> {
        // eval mode draws nothing from the generator
        self.forward(ids, false, &mut ChaCha8Rng::seed_from_u64(0))
    }

    pub fn predict_ids(&self, ids: &[usize]) -> Result<Prediction> {
        let tr = self.infer(ids)?;
        let mut probs: Vec<T> = tr.intent_logits().to_vec();
        crate::numerics::softmax_in_place(&mut probs);
        let intent = if probs[1] > probs[0] {
            Intent::NonCommercial
        } else {
            Intent::Commercial
        };
        let category_scores: Vec<f64> = tr
            .category_logits()
            .iter()
            .map(|&s| sigmoid_scalar(s).to_f64_lossless())
            .collect();
        let raw_categories: Vec<usize> = category_scores
            .iter()
            .enumerate()
            .filter(|&(c, &p)| p > self.config.threshold_of(c))
            .map(|(c, _)| c)
            .collect();
        let categories = if intent == Intent::Commercial {
            raw_categories.clone()
        } else {
            Vec::new()
        };
        Ok(Prediction {
            intent,
            intent_probs: [probs[0].to_f64_lossless(), probs[1].to_f64_lossless()],
            category_scores,
            raw_categories,
            categories,
        })
    }

    pub fn predict(&self, tokens: &[String]) -> Result<Prediction> {
        self.predict_ids(&self.encode(tokens)?)
    }

    /// Predictions for many queries, in input order.
    pub fn predict_batch(&self, ids: &[Vec<usize>]) -> Result<Vec<Prediction>> {
        ids.par_iter().map(|q| self.predict_ids(q)).collect()
    }

    /// Mean record loss of `batch` and its gradient. Record `i` draws its
    /// dropout masks from a generator seeded with `seeds[i]`.
    pub fn batch_loss_grad(
        &self,
        batch: &[Example],
        seeds: &[u64],
        training: bool,
    ) -> Result<(T, Gradients<T>)> {
        batch_loss_grad(&self.layout, &self.config, &self.store, batch, seeds, training)
    }

    /// Mean eval-mode loss, no gradient.
    pub fn mean_loss(&self, batch: &[Example]) -> Result<T> {
        if batch.is_empty() {
            return Err(Error::Input("empty batch".into()));
        }
        let parts: Result<Vec<T>> = batch
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                let mut s = T::zero();
                for ex in chunk {
                    s += self
                        .layout
                        .record_loss(&self.config, &self.store, ex, false, &mut rng, T::one(), None)?
                        .total;
                }
                Ok(s)
            })
            .collect();
        Ok(parts?.into_iter().sum::<T>() / T::of(batch.len() as f64))
    }

    /// Central-difference check of every parameter gradient on `batch`.
    pub fn gradcheck(&mut self, batch: &[Example], seed: u64, training: bool, tolerance: f64) -> Result<GradCheckReport> {
        let seeds: Vec<u64> = (0..batch.len() as u64).map(|i| seed.wrapping_add(i)).collect();
        let layout = self.layout.clone();
        let config = self.config.clone();
        check_gradients(
            &mut self.store,
            |store| {
                let (loss, grads) = batch_loss_grad(&layout, &config, store, batch, &seeds, training)?;
                store.set_gradients(grads)?;
                Ok(loss)
            },
            tolerance,
        )
    }

    /// Macro/micro F1 against the records' labels. Category scores count
    /// commercial records only and use the ungated category output.
    pub fn score(&self, examples: &[Example]) -> Result<Scores> {
        let ids: Vec<Vec<usize>> = examples.iter().map(|e| e.ids.clone()).collect();
        let preds = self.predict_batch(&ids)?;
        let pred_intents: Vec<usize> = preds.iter().map(|p| p.intent.index()).collect();
        let gold_intents: Vec<usize> = examples.iter().map(|e| e.intent).collect();
        let mut pc = Vec::new();
        let mut gc = Vec::new();
        for (p, e) in preds.iter().zip(examples) {
            if e.has_category_target() {
                pc.push(p.raw_categories.clone());
                gc.push(e.categories.clone());
            }
        }
        Ok(Scores {
            intent: count_single(&pred_intents, &gold_intents, 2)?,
            category: count_multi(&pc, &gc, self.config.n_categories)?,
        })
    }

    /// Copies word vectors for known tokens from a whitespace separated
    /// text file (`token v1 v2 ...`). Returns how many rows were set.
    pub fn load_word_vectors(&mut self, text: &str) -> Result<usize> {
        let dim = self.config.embed_dim;
        let word = self.layout.word;
        let mut set = 0;
        for (line_no, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(tok) = parts.next() else { continue };
            let vals: std::result::Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| Error::Parse {
                path: "<word vectors>".into(),
                line: line_no + 1,
                message: e.to_string(),
            })?;
            if vals.len() != dim {
                return Err(Error::Parse {
                    path: "<word vectors>".into(),
                    line: line_no + 1,
                    message: format!("{} values, expected {dim}", vals.len()),
                });
            }
            let id = self.vocab.id(tok);
            if id == UNK && tok != UNK_TOKEN {
                continue;
            }
            for (o, v) in self.store.value_mut(word).row_mut(id).iter_mut().zip(vals) {
                *o = T::of(v);
            }
            set += 1;
        }
        Ok(set)
    }
}

/// Intent and category counts of one scoring pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scores {
    pub intent: PerClassCounts,
    pub category: PerClassCounts,
}

impl Scores {
    pub fn intent_macro_f1(&self) -> f64 {
        f1_macro(&self.intent)
    }

    pub fn intent_micro_f1(&self) -> f64 {
        f1_micro(&self.intent)
    }

    pub fn category_macro_f1(&self) -> f64 {
        f1_macro(&self.category)
    }

    pub fn category_micro_f1(&self) -> f64 {
        f1_micro(&self.category)
    }
}

fn batch_loss_grad<T: Scalar>(
    layout: &Layout,
    config: &ModelConfig,
    store: &ParamStore<T>,
    batch: &[Example],
    seeds: &[u64],
    training: bool,
) -> Result<(T, Gradients<T>)> {
    if batch.is_empty() {
        return Err(Error::Input("empty batch".into()));
    }
    if seeds.len() != batch.len() {
        return Err(Error::Input(format!(
            "{} seeds for {} records",
            seeds.len(),
            batch.len()
        )));
    }
    let scale = T::one() / T::of(batch.len() as f64);
    let parts: Result<Vec<(T, Gradients<T>)>> = batch
        .par_chunks(CHUNK)
        .zip(seeds.par_chunks(CHUNK))
        .map(|(chunk, chunk_seeds)| {
            let mut grads = store.zero_gradients();
            let mut loss = T::zero();
            for (ex, &seed) in chunk.iter().zip(chunk_seeds) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                loss += layout
                    .record_loss(config, store, ex, training, &mut rng, scale, Some(&mut grads))?
                    .total;
            }
            Ok((loss, grads))
        })
        .collect();
    let mut parts = parts?.into_iter();
    let (mut loss, mut grads) = parts.next().expect("non-empty batch");
    for (l, g) in parts {
        loss += l;
        grads.add_assign(&g);
    }
    Ok((loss * scale, grads))
}
