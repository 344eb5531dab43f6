use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the network and its loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Rows of the word table, UNK included. Set from the vocabulary.
    pub vocab_size: usize,
    pub embed_dim: usize,
    /// Tokens per query after truncation and padding.
    pub query_len: usize,
    pub n_categories: usize,
    pub n_intents: usize,
    /// Attention heads; must divide `query_len`.
    pub heads: usize,
    pub gamma: f64,
    /// Per-category focal weights. Empty means all 1.
    pub alpha: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub dropout: f64,
    /// Per-category decision thresholds on the sigmoid score. Empty means
    /// all `default_threshold`.
    pub thresholds: Vec<f64>,
    pub default_threshold: f64,
    /// Initial gate bias of both highway layers.
    pub gate_bias_init: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            vocab_size: 0,
            embed_dim: 300,
            query_len: 10,
            n_categories: 32,
            n_intents: 2,
            heads: 10,
            gamma: 1.5,
            alpha: Vec::new(),
            beta1: 0.5,
            beta2: 0.5,
            dropout: 0.5,
            thresholds: Vec::new(),
            default_threshold: 0.5,
            gate_bias_init: -1.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.vocab_size == 0 {
            return bad("vocabulary must contain at least the UNK row".into());
        }
        if self.embed_dim == 0 || self.query_len == 0 || self.n_categories == 0 {
            return bad("embedding dim, query length and category count must be >= 1".into());
        }
        if self.n_intents != 2 {
            return bad(format!("intent count must be 2, got {}", self.n_intents));
        }
        if self.heads == 0 || self.query_len % self.heads != 0 {
            return bad(format!(
                "{} heads do not evenly divide attention width {}",
                self.heads, self.query_len
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("focal gamma {} must be >= 0", self.gamma));
        }
        if !self.alpha.is_empty() && self.alpha.len() != self.n_categories {
            return bad(format!(
                "{} focal weights for {} categories",
                self.alpha.len(),
                self.n_categories
            ));
        }
        if self.alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return bad("focal weights must be > 0".into());
        }
        if !(self.beta1 >= 0.0 && self.beta2 >= 0.0) {
            return bad("loss weights must be >= 0".into());
        }
        if self.beta1 == 0.0 && self.beta2 == 0.0 {
            return bad("loss weights beta1 and beta2 are both zero".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout rate {} outside [0, 1)", self.dropout));
        }
        if !self.thresholds.is_empty() && self.thresholds.len() != self.n_categories {
            return bad(format!(
                "{} thresholds for {} categories",
                self.thresholds.len(),
                self.n_categories
            ));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.query_len / self.heads
    }

    pub fn n_labels(&self) -> usize {
        self.n_categories + self.n_intents
    }

    pub fn alpha_of(&self, c: usize) -> f64 {
        self.alpha.get(c).copied().unwrap_or(1.0)
    }

    pub fn threshold_of(&self, c: usize) -> f64 {
        self.thresholds.get(c).copied().unwrap_or(self.default_threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ModelConfig {
        ModelConfig {
            vocab_size: 12,
            embed_dim: 4,
            query_len: 4,
            n_categories: 3,
            heads: 2,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn heads_must_divide_width() {
        assert!(tiny().validate().is_ok());
        let c = ModelConfig { heads: 3, ..tiny() };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn zero_loss_weights_rejected() {
        let c = ModelConfig {
            beta1: 0.0,
            beta2: 0.0,
            ..tiny()
        };
        assert!(c.validate().is_err());
        let c = ModelConfig { beta2: 0.0, ..tiny() };
        assert!(c.validate().is_ok());
    }

    #[test]
    fn defaults() {
        let c = ModelConfig::default();
        assert_eq!((c.embed_dim, c.query_len, c.heads), (300, 10, 10));
        assert_eq!((c.gamma, c.beta1, c.beta2, c.dropout), (1.5, 0.5, 0.5, 0.5));
        assert_eq!(tiny().alpha_of(2), 1.0);
        assert_eq!(tiny().threshold_of(0), 0.5);
    }
}
