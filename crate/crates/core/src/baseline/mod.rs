//! Tf-idf features, one-vs-rest linear SVM and exact cosine KNN.

mod io;
mod knn;
mod svm;
mod tfidf;

use rand::Rng;

use crate::error::Result;

pub(crate) use io::{ByteReader, ByteWriter};
pub use io::{decode_text_svm, encode_text_svm, load_text_svm, save_text_svm, SVM_MAGIC};
pub use knn::{cosine_distance, KnnIndex, Neighbors};
pub use svm::{svm_objective, BinaryLinear, LinearSvm, SvmConfig};
pub use tfidf::{ngrams, smoothed_idf, SparseVec, TfIdfVectorizer};

/// A vectorizer and the SVM trained on its features.
#[derive(Debug, Clone, PartialEq)]
pub struct TextSvm {
    pub vectorizer: TfIdfVectorizer,
    pub svm: LinearSvm,
}

impl TextSvm {
    /// Fits tf-idf on `docs` and trains one-vs-rest over `n_classes`.
    pub fn fit_one_vs_rest<S: AsRef<[String]> + Sync, R: Rng>(
        docs: &[S],
        targets: &[Vec<usize>],
        n_classes: usize,
        config: SvmConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let vectorizer = TfIdfVectorizer::fit(docs)?;
        let x = vectorizer.transform_all(docs);
        let svm =
            LinearSvm::train_one_vs_rest(&x, targets, n_classes, vectorizer.dim(), config, rng)?;
        Ok(Self { vectorizer, svm })
    }

    /// Fits tf-idf on `docs` and trains a single binary classifier.
    pub fn fit_binary<S: AsRef<[String]> + Sync, R: Rng>(
        docs: &[S],
        labels: &[bool],
        config: SvmConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let vectorizer = TfIdfVectorizer::fit(docs)?;
        let x = vectorizer.transform_all(docs);
        let svm = LinearSvm::train_binary(&x, labels, vectorizer.dim(), config, rng)?;
        Ok(Self { vectorizer, svm })
    }

    pub fn decision(&self, tokens: &[String]) -> Result<Vec<f64>> {
        self.svm.decision(&self.vectorizer.transform(tokens))
    }

    pub fn predict_class(&self, tokens: &[String]) -> Result<usize> {
        self.svm.predict_class(&self.vectorizer.transform(tokens))
    }

    pub fn predict_labels(&self, tokens: &[String]) -> Result<Vec<usize>> {
        self.svm.predict_labels(&self.vectorizer.transform(tokens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn text_svm_round_trips_through_bytes() {
        let docs: Vec<Vec<String>> = ["cordless drill", "gas range", "store hours dallas", "drill bits"]
            .iter()
            .map(|t| tokenize(t))
            .collect();
        let targets = vec![vec![0], vec![1], vec![2], vec![0]];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = TextSvm::fit_one_vs_rest(&docs, &targets, 3, SvmConfig::default(), &mut rng).unwrap();
        m.svm = LinearSvm::from_parts(
            m.svm.dim(),
            m.svm.config(),
            m.svm
                .classes()
                .iter()
                .map(|c| BinaryLinear {
                    objective: vec![],
                    ..c.clone()
                })
                .collect(),
        )
        .unwrap();
        let bytes = encode_text_svm(&m).unwrap();
        assert_eq!(&bytes[..6], SVM_MAGIC);
        let back = decode_text_svm(&bytes).unwrap();
        assert_eq!(back, m);
        for d in &docs {
            assert_eq!(back.predict_class(d).unwrap(), m.predict_class(d).unwrap());
        }
        assert!(decode_text_svm(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_text_svm(&bad).is_err());
    }
}
