use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tfidf::SparseVec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 20,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("svm lambda {} must be > 0", self.lambda)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("svm epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// One binary linear classifier: margin = w.x + b.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLinear {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Regularized hinge objective of each epoch's averaged iterate.
    pub objective: Vec<f64>,
}

impl BinaryLinear {
    pub fn margin(&self, x: &SparseVec) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }
}

/// Linear SVM, one binary classifier per class.
///
/// Trained with Pegasos subgradient steps on the L2-regularized hinge loss.
/// The bias is an extra constant feature and is regularized with the rest.
/// Each epoch's iterates are averaged and the last epoch's average is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    dim: usize,
    config: SvmConfig,
    classes: Vec<BinaryLinear>,
}

impl LinearSvm {
    pub fn from_parts(dim: usize, config: SvmConfig, classes: Vec<BinaryLinear>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Format("svm has no classes".into()));
        }
        if let Some(c) = classes.iter().find(|c| c.weights.len() != dim) {
            return Err(Error::Shape(format!(
                "svm weight vector of length {} for dimension {dim}",
                c.weights.len()
            )));
        }
        Ok(Self {
            dim,
            config,
            classes,
        })
    }

    /// Single binary classifier; a positive margin predicts `true`.
    pub fn train_binary<R: Rng>(
        x: &[SparseVec],
        y: &[bool],
        dim: usize,
        config: SvmConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        check_inputs(x, y.len(), dim)?;
        let pos = y.iter().filter(|&&b| b).count();
        if pos == 0 || pos == y.len() {
            return Err(Error::Config("svm training data contains a single class".into()));
        }
        let labels: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        let class = pegasos(x, &labels, dim, config, rng.gen());
        Ok(Self {
            dim,
            config,
            classes: vec![class],
        })
    }

    /// One-vs-rest over `n_classes`; `targets[i]` is the label set of record
    /// `i` (a singleton for multi-class data).
    pub fn train_one_vs_rest<R: Rng>(
        x: &[SparseVec],
        targets: &[Vec<usize>],
        n_classes: usize,
        dim: usize,
        config: SvmConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        check_inputs(x, targets.len(), dim)?;
        if n_classes < 2 {
            return Err(Error::Config("one-vs-rest needs at least 2 classes".into()));
        }
        let mut labels = vec![vec![-1.0; x.len()]; n_classes];
        for (i, t) in targets.iter().enumerate() {
            for &c in t {
                if c >= n_classes {
                    return Err(Error::Input(format!("label {c} outside {n_classes} classes")));
                }
                labels[c][i] = 1.0;
            }
        }
        for (c, l) in labels.iter().enumerate() {
            let pos = l.iter().filter(|&&v| v > 0.0).count();
            if pos == 0 || pos == l.len() {
                return Err(Error::Config(format!(
                    "class {c} is single-class in the training data ({pos} positives of {})",
                    l.len()
                )));
            }
        }
        let seeds: Vec<u64> = (0..n_classes).map(|_| rng.gen()).collect();
        let classes = labels
            .par_iter()
            .zip(seeds)
            .map(|(l, s)| pegasos(x, l, dim, config, s))
            .collect();
        Ok(Self {
            dim,
            config,
            classes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> SvmConfig {
        self.config
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[BinaryLinear] {
        &self.classes
    }

    /// Raw affine margins, one per class.
    pub fn decision(&self, x: &SparseVec) -> Result<Vec<f64>> {
        if x.min_dim() > self.dim {
            return Err(Error::Shape(format!(
                "feature index {} outside svm dimension {}",
                x.min_dim() - 1,
                self.dim
            )));
        }
        Ok(self.classes.iter().map(|c| c.margin(x)).collect())
    }

    /// Argmax margin for multi-class models, sign (0 or 1) for binary ones.
    pub fn predict_class(&self, x: &SparseVec) -> Result<usize> {
        let m = self.decision(x)?;
        if m.len() == 1 {
            return Ok(usize::from(m[0] > 0.0));
        }
        Ok(argmax(&m))
    }

    /// Classes with a positive margin.
    pub fn predict_labels(&self, x: &SparseVec) -> Result<Vec<usize>> {
        let m = self.decision(x)?;
        Ok((0..m.len()).filter(|&c| m[c] > 0.0).collect())
    }

    /// Multiplies every weight and bias by `c`.
    pub fn scale(&mut self, c: f64) {
        for cl in &mut self.classes {
            cl.weights.iter_mut().for_each(|w| *w *= c);
            cl.bias *= c;
        }
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

fn check_inputs(x: &[SparseVec], n_labels: usize, dim: usize) -> Result<()> {
    if x.len() != n_labels {
        return Err(Error::Input(format!("{} feature rows but {n_labels} labels", x.len())));
    }
    if x.is_empty() {
        return Err(Error::Config("svm training data is empty".into()));
    }
    if let Some(v) = x.iter().find(|v| v.min_dim() > dim) {
        return Err(Error::Shape(format!(
            "feature index {} outside dimension {dim}",
            v.min_dim() - 1
        )));
    }
    Ok(())
}

/// `lambda/2 |w|^2 + mean hinge`, with the bias regularized.
pub fn svm_objective(x: &[SparseVec], y: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let reg = w.iter().map(|v| v * v).sum::<f64>() + b * b;
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| (1.0 - yi * (xi.dot_dense(w) + b)).max(0.0))
        .sum();
    0.5 * lambda * reg + hinge / x.len() as f64
}

fn pegasos(x: &[SparseVec], y: &[f64], dim: usize, cfg: SvmConfig, seed: u64) -> BinaryLinear {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = cfg.lambda;
    // w = s * v, the bias is coordinate `dim`
    let mut v = vec![0.0; dim + 1];
    let mut s = 1.0f64;
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut objective = Vec::with_capacity(cfg.epochs);
    let mut avg = vec![0.0; dim + 1];

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        // running sum of iterates: sum = c * v - u
        let mut c = 0.0f64;
        let mut u = vec![0.0; dim + 1];
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let xi = &x[i];
            let m = y[i] * s * (xi.dot_dense(&v[..dim]) + v[dim]);
            if t > 1 {
                s *= 1.0 - 1.0 / t as f64;
            }
            if m < 1.0 {
                let step = eta * y[i] / s;
                for (j, val) in xi.iter() {
                    v[j] += step * val;
                    u[j] += step * val * c;
                }
                v[dim] += step;
                u[dim] += step * c;
            }
            c += s;
        }
        let n = order.len() as f64;
        for j in 0..=dim {
            avg[j] = (c * v[j] - u[j]) / n;
        }
        objective.push(svm_objective(x, y, &avg[..dim], avg[dim], lambda));
        // rescale to keep s away from underflow over long runs
        if s < 1e-100 {
            v.iter_mut().for_each(|e| *e *= s);
            s = 1.0;
        }
    }
    BinaryLinear {
        bias: avg[dim],
        weights: avg[..dim].to_vec(),
        objective,
    }
}
