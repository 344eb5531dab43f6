use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::Example;
use super::JointMap;
use crate::error::{Error, Result};
use crate::numerics::AdamConfig;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Seeds the shuffling and every dropout draw.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            epochs: 30,
            batch_size: 64,
            learning_rate: 0.001,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn adam(&self) -> AdamConfig {
        AdamConfig {
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be >= 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_macro_f1_intent: f64,
    pub val_macro_f1_category: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochReport>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl<T: Scalar> JointMap<T> {
    /// Minibatch Adam. After every epoch the validation set is scored and
    /// the parameters with the highest sum of intent and category macro-F1
    /// are restored at the end (earliest epoch on ties).
    pub fn train(&mut self, train: &[Example], val: &[Example], cfg: &TrainConfig) -> Result<TrainReport> {
        self.train_with(train, val, cfg, |_| {})
    }

    /// [`JointMap::train`] with a callback after each epoch.
    pub fn train_with(
        &mut self,
        train: &[Example],
        val: &[Example],
        cfg: &TrainConfig,
        mut on_epoch: impl FnMut(&EpochReport),
    ) -> Result<TrainReport> {
        cfg.validate()?;
        if train.is_empty() || val.is_empty() {
            return Err(Error::Input("training and validation sets must be non-empty".into()));
        }
        let adam = cfg.adam();
        let lr = T::of(cfg.learning_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut reports = Vec::with_capacity(cfg.epochs);
        let mut best: Option<(f64, usize, Vec<_>)> = None;
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            let mut loss_sum = 0.0;
            for idx in order.chunks(cfg.batch_size) {
                let batch: Vec<Example> = idx.iter().map(|&i| train[i].clone()).collect();
                let seeds: Vec<u64> = (0..batch.len()).map(|_| rng.gen()).collect();
                let (loss, grads) = self.batch_loss_grad(&batch, &seeds, true)?;
                if !loss.is_finite() {
                    return Err(Error::Consistency(format!("non-finite loss in epoch {epoch}")));
                }
                loss_sum += loss.to_f64_lossless() * batch.len() as f64;
                let store = self.params_mut();
                store.set_gradients(grads)?;
                store.adam_step(lr, &adam)?;
            }
            let scores = self.score(val)?;
            let report = EpochReport {
                epoch,
                train_loss: loss_sum / train.len() as f64,
                val_macro_f1_intent: scores.intent_macro_f1(),
                val_macro_f1_category: scores.category_macro_f1(),
            };
            on_epoch(&report);
            let key = report.val_macro_f1_intent + report.val_macro_f1_category;
            if best.as_ref().map_or(true, |(b, _, _)| key > *b) {
                best = Some((key, epoch, self.params().values()));
            }
            reports.push(report);
        }
        let (_, best_epoch, values) = best.expect("at least one epoch");
        self.params_mut().restore_values(values)?;
        Ok(TrainReport {
            epochs: reports,
            best_epoch,
        })
    }
}

/// One JSON object per line.
pub fn write_report_jsonl(path: &Path, epochs: &[EpochReport]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for e in epochs {
        writeln!(f, "{}", serde_json::to_string(e)?)?;
    }
    Ok(())
}

pub fn read_report_jsonl(path: &Path) -> Result<Vec<EpochReport>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
