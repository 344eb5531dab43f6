use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Token table. Row 0 is the shared UNK token; padding has no row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

pub const UNK: usize = 0;
pub const UNK_TOKEN: &str = "<unk>";

impl Vocab {
    /// Sorted, deduplicated vocabulary of every token in `docs`.
    pub fn build<S: AsRef<[String]>>(docs: &[S]) -> Self {
        let set: BTreeSet<&str> = docs
            .iter()
            .flat_map(|d| d.as_ref().iter().map(String::as_str))
            .filter(|t| *t != UNK_TOKEN)
            .collect();
        let mut tokens = vec![UNK_TOKEN.to_string()];
        tokens.extend(set.into_iter().map(str::to_string));
        Self::from_tokens(tokens).expect("built vocabulary is valid")
    }

    /// Rebuilds a vocabulary; `tokens[0]` must be the UNK token.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.first().map(String::as_str) != Some(UNK_TOKEN) {
            return Err(Error::Format(format!("vocabulary must start with {UNK_TOKEN}")));
        }
        let index: HashMap<String, usize> =
            tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != tokens.len() {
            return Err(Error::Format("duplicate token in vocabulary".into()));
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    /// Token ids of the first `max_len` tokens.
    pub fn encode(&self, tokens: &[String], max_len: usize) -> Result<Vec<usize>> {
        if tokens.is_empty() {
            return Err(Error::Input("empty token list".into()));
        }
        Ok(tokens.iter().take(max_len).map(|t| self.id(t)).collect())
    }
}
