use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Sparse real vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn new(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut indices: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        Self { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Largest index plus one, or 0 for the empty vector.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i + 1)
    }

    pub fn dot(&self, other: &SparseVec) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }
}

/// Unigram and bigram terms of a token list. Bigrams join with a space.
pub fn ngrams(tokens: &[String]) -> Vec<String> {
    let mut out: Vec<String> = tokens.to_vec();
    out.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

/// Word 1,2-gram tf-idf with smoothed idf and L2-normalized rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfVectorizer {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    n_docs: usize,
}

impl TfIdfVectorizer {
    /// Fits on tokenized documents. Vocabulary is sorted lexicographically.
    pub fn fit<S: AsRef<[String]>>(docs: &[S]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Input("cannot fit tf-idf on an empty corpus".into()));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in docs {
            let mut grams = ngrams(doc.as_ref());
            grams.sort_unstable();
            grams.dedup();
            for g in grams {
                *df.entry(g).or_default() += 1;
            }
        }
        let n = docs.len();
        let terms: Vec<String> = df.keys().cloned().collect();
        let idf = df.values().map(|&d| smoothed_idf(n, d)).collect();
        Self::from_parts(terms, idf, n)
    }

    pub fn from_parts(terms: Vec<String>, idf: Vec<f64>, n_docs: usize) -> Result<Self> {
        if terms.len() != idf.len() {
            return Err(Error::Format(format!(
                "{} terms but {} idf weights",
                terms.len(),
                idf.len()
            )));
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect::<HashMap<_, _>>();
        if index.len() != terms.len() {
            return Err(Error::Format("duplicate vocabulary term".into()));
        }
        Ok(Self {
            terms,
            index,
            idf,
            n_docs,
        })
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Unit-norm tf-idf vector, or the zero vector when every term is
    /// out of vocabulary.
    pub fn transform(&self, tokens: &[String]) -> SparseVec {
        let pairs = ngrams(tokens)
            .iter()
            .filter_map(|g| self.index.get(g).map(|&i| (i, self.idf[i])))
            .collect();
        let mut v = SparseVec::new(pairs);
        let norm = v.norm();
        if norm > 0.0 {
            v.values.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    pub fn transform_all<S: AsRef<[String]> + Sync>(&self, docs: &[S]) -> Vec<SparseVec> {
        use rayon::prelude::*;
        docs.par_iter().map(|d| self.transform(d.as_ref())).collect()
    }
}

pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts.iter().map(|t| tokenize(t)).collect()
    }

    #[test]
    fn single_document_is_unit() {
        let d = docs(&["cordless drill kit"]);
        let v = TfIdfVectorizer::fit(&d).unwrap();
        let x = v.transform(&d[0]);
        assert!(!x.is_zero());
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_vocabulary_is_zero() {
        let v = TfIdfVectorizer::fit(&docs(&["drill"])).unwrap();
        let x = v.transform(&tokenize("store hours"));
        assert_eq!(x.nnz(), 0);
        assert_eq!(x.norm(), 0.0);
        assert!(v.transform(&[]).is_zero());
    }

    #[test]
    fn idf_matches_hand_counts() {
        let d = docs(&["gas range", "gas grill", "range hood"]);
        let v = TfIdfVectorizer::fit(&d).unwrap();
        // df: gas 2, range 2, grill 1, hood 1, and three bigrams with df 1
        let expect = |df: f64| (4.0f64 / (1.0 + df)).ln() + 1.0;
        let terms = ["gas", "range", "grill", "hood", "gas range", "gas grill", "range hood"];
        let dfs = [2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        for (t, df) in terms.iter().zip(dfs) {
            let i = v.term_index(t).unwrap();
            assert!((v.idf()[i] - expect(df)).abs() < 1e-15, "{t}");
        }
        assert_eq!(v.dim(), 7);
        let mut sorted = v.terms().to_vec();
        sorted.sort();
        assert_eq!(sorted, v.terms());

        let x = v.transform(&d[0]);
        let raw = [expect(2.0), expect(2.0), expect(1.0)];
        let n = raw.iter().map(|r| r * r).sum::<f64>().sqrt();
        let gi = x.indices.iter().position(|&i| i == v.term_index("gas").unwrap()).unwrap();
        assert!((x.values[gi] - raw[0] / n).abs() < 1e-15);
    }

    #[test]
    fn sparse_constructor_merges() {
        let v = SparseVec::new(vec![(3, 1.0), (1, 2.0), (3, 0.5)]);
        assert_eq!(v.indices, vec![1, 3]);
        assert_eq!(v.values, vec![2.0, 1.5]);
        assert_eq!(v.dot(&SparseVec::new(vec![(3, 2.0)])), 3.0);
    }

    #[test]
    fn empty_fit_rejected() {
        let d: Vec<Vec<String>> = vec![];
        assert!(TfIdfVectorizer::fit(&d).is_err());
    }
}
