use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Provenance, Record, Split};
use crate::baseline::{KnnIndex, LinearSvm, SparseVec, SvmConfig, TfIdfVectorizer};
use crate::corpus::{Intent, LabelOracle, QueryId};
use crate::error::{Error, Result};

/// An unlabelled query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolQuery {
    pub query_id: QueryId,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActiveLearningConfig {
    pub k: usize,
    pub agreement: f64,
    pub tau: f64,
    pub stop_threshold: f64,
    pub max_iters: usize,
    /// Most tricky samples relabelled per iteration; `None` relabels all.
    pub relabel_cap: Option<usize>,
    /// Pool queries moved into the held-out test set before iterating.
    pub test_size: usize,
    pub svm: SvmConfig,
}

impl Default for ActiveLearningConfig {
    fn default() -> Self {
        Self {
            k: 5,
            agreement: 0.8,
            tau: 0.25,
            stop_threshold: 0.95,
            max_iters: 10,
            relabel_cap: Some(200),
            test_size: 500,
            svm: SvmConfig::default(),
        }
    }
}

impl ActiveLearningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("knn k must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.agreement) {
            return Err(Error::Config(format!("agreement {} outside [0, 1]", self.agreement)));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::Config(format!("tau {} must be >= 0", self.tau)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.test_size == 0 {
            return Err(Error::Config("held-out test set must be non-empty".into()));
        }
        self.svm.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveLearningState {
    /// Labelled set D as (query id, intent, provenance), in insertion order.
    pub labeled: Vec<(QueryId, Intent, Provenance)>,
    /// Held-out oracle labels.
    pub test: Vec<(QueryId, Intent)>,
    pub iteration: usize,
    pub accuracy_history: Vec<f64>,
    pub tau: f64,
    pub stop_threshold: f64,
    /// Tricky samples relabelled in each iteration.
    pub tricky_history: Vec<Vec<QueryId>>,
    /// |D| after each iteration.
    pub size_history: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveLearningOutcome {
    pub dataset: LabeledDataset,
    pub state: ActiveLearningState,
    pub converged: bool,
    /// Pool queries never labelled.
    pub unlabeled: Vec<QueryId>,
}

/// Labels pool queries whose `k` nearest labelled neighbours agree.
///
/// Neighbours are searched among `labeled` by cosine distance. Neighbours
/// sharing no feature with the query (distance 1) carry no evidence and do
/// not count towards `k`. Returns `(pool index, label)` pairs.
pub fn knn_expand(
    labeled: &[(SparseVec, Intent)],
    pool: &[SparseVec],
    k: usize,
    agreement: f64,
) -> Result<Vec<(usize, Intent)>> {
    if k == 0 {
        return Err(Error::Config("knn k must be >= 1".into()));
    }
    if labeled.is_empty() {
        return Err(Error::Input("knn expansion needs a labelled set".into()));
    }
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let index = KnnIndex::new(labeled.iter().map(|(v, _)| v.clone()).collect());
    let found: Vec<Option<(usize, Intent)>> = pool
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let n = index.query(q, k).ok()?;
            let hits: Vec<_> = n.hits.iter().filter(|h| h.1 < 1.0).collect();
            if hits.len() < k {
                return None;
            }
            let commercial = hits
                .iter()
                .filter(|h| labeled[h.0].1 == Intent::Commercial)
                .count();
            for (intent, votes) in [
                (Intent::Commercial, commercial),
                (Intent::NonCommercial, k - commercial),
            ] {
                if votes as f64 >= agreement * k as f64 && 2 * votes > k {
                    return Some((i, intent));
                }
            }
            None
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// Ids with `|margin| < tau`, sorted by ascending `|margin|` (ties by id).
pub fn find_tricky_samples(scores: &[(QueryId, f64)], tau: f64) -> Vec<QueryId> {
    let mut hits: Vec<(QueryId, f64)> = scores
        .iter()
        .filter(|(_, m)| m.abs() < tau)
        .map(|&(id, m)| (id, m.abs()))
        .collect();
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    hits.into_iter().map(|(id, _)| id).collect()
}

/// Iterative dataset construction: KNN expansion, SVM confidence scores,
/// oracle relabelling of low-margin samples, held-out accuracy.
///
/// The held-out test set is drawn from `pool` once, before iterating.
/// Margins are positive for commercial.
pub fn algorithm1_run<R: Rng>(
    seed_set: &[(PoolQuery, Intent)],
    pool: &[PoolQuery],
    oracle: &dyn LabelOracle,
    cfg: &ActiveLearningConfig,
    rng: &mut R,
) -> Result<ActiveLearningOutcome> {
    cfg.validate()?;
    if seed_set.is_empty() {
        return Err(Error::Config("seed set is empty".into()));
    }
    let has = |i: Intent| seed_set.iter().any(|(_, l)| *l == i);
    if !has(Intent::Commercial) || !has(Intent::NonCommercial) {
        return Err(Error::Config("seed set must contain both intents".into()));
    }
    if pool.len() <= cfg.test_size {
        return Err(Error::Config(format!(
            "pool of {} cannot supply a held-out set of {}",
            pool.len(),
            cfg.test_size
        )));
    }

    // One feature space for every query.
    let mut all_tokens: Vec<&[String]> = seed_set.iter().map(|(q, _)| q.tokens.as_slice()).collect();
    all_tokens.extend(pool.iter().map(|q| q.tokens.as_slice()));
    let vectorizer = TfIdfVectorizer::fit(&all_tokens)?;
    let features: HashMap<QueryId, SparseVec> = seed_set
        .iter()
        .map(|(q, _)| q)
        .chain(pool)
        .map(|q| (q.query_id, vectorizer.transform(&q.tokens)))
        .collect();
    let tokens: HashMap<QueryId, &[String]> = seed_set
        .iter()
        .map(|(q, _)| q)
        .chain(pool)
        .map(|q| (q.query_id, q.tokens.as_slice()))
        .collect();
    if tokens.len() != seed_set.len() + pool.len() {
        return Err(Error::Input("duplicate query id across seed set and pool".into()));
    }

    let mut order: Vec<QueryId> = pool.iter().map(|q| q.query_id).collect();
    order.shuffle(rng);
    let test_ids: Vec<QueryId> = order[..cfg.test_size].to_vec();
    let mut remaining: Vec<QueryId> = {
        let mut r = order[cfg.test_size..].to_vec();
        r.sort_unstable();
        r
    };
    let test = test_ids
        .iter()
        .map(|&id| Ok((id, oracle.label(id)?.intent)))
        .collect::<Result<Vec<_>>>()?;

    // query id -> (intent, provenance), BTreeMap for a stable order
    let mut labels: BTreeMap<QueryId, (Intent, Provenance)> = seed_set
        .iter()
        .map(|(q, l)| (q.query_id, (*l, Provenance::Seed)))
        .collect();
    let mut insertion: Vec<QueryId> = seed_set.iter().map(|(q, _)| q.query_id).collect();

    let mut state = ActiveLearningState {
        labeled: Vec::new(),
        test,
        iteration: 0,
        accuracy_history: Vec::new(),
        tau: cfg.tau,
        stop_threshold: cfg.stop_threshold,
        tricky_history: Vec::new(),
        size_history: Vec::new(),
    };
    let dim = vectorizer.dim();
    let train = |labels: &BTreeMap<QueryId, (Intent, Provenance)>, rng: &mut R| {
        let x: Vec<SparseVec> = labels.keys().map(|id| features[id].clone()).collect();
        let y: Vec<bool> = labels.values().map(|(l, _)| *l == Intent::Commercial).collect();
        LinearSvm::train_binary(&x, &y, dim, cfg.svm, rng)
    };
    let mut converged = false;

    while state.iteration < cfg.max_iters {
        // Expand
        let labeled_vecs: Vec<(SparseVec, Intent)> = labels
            .iter()
            .map(|(id, (l, _))| (features[id].clone(), *l))
            .collect();
        let pool_vecs: Vec<SparseVec> = remaining.iter().map(|id| features[id].clone()).collect();
        let added = knn_expand(&labeled_vecs, &pool_vecs, cfg.k, cfg.agreement)?;
        let mut taken = vec![false; remaining.len()];
        for (i, l) in added {
            let id = remaining[i];
            labels.insert(id, (l, Provenance::Knn));
            insertion.push(id);
            taken[i] = true;
        }
        remaining = remaining
            .iter()
            .zip(&taken)
            .filter(|(_, &t)| !t)
            .map(|(&id, _)| id)
            .collect();

        // Confidence scores on unverified labels and the rest of the pool
        let svm = train(&labels, rng)?;
        let mut scores: Vec<(QueryId, f64)> = labels
            .iter()
            .filter(|(_, (_, p))| *p == Provenance::Knn)
            .map(|(&id, _)| id)
            .chain(remaining.iter().copied())
            .map(|id| Ok((id, svm.decision(&features[&id])?[0])))
            .collect::<Result<_>>()?;
        scores.sort_by_key(|s| s.0);
        let mut tricky = find_tricky_samples(&scores, cfg.tau);
        if let Some(cap) = cfg.relabel_cap {
            tricky.truncate(cap);
        }

        // Relabel
        let mut from_pool = Vec::new();
        for &id in &tricky {
            let gold = oracle.label(id)?.intent;
            if labels.insert(id, (gold, Provenance::OracleRelabel)).is_none() {
                insertion.push(id);
                from_pool.push(id);
            }
        }
        if !from_pool.is_empty() {
            from_pool.sort_unstable();
            remaining.retain(|id| from_pool.binary_search(id).is_err());
        }

        // Held-out accuracy
        let svm = train(&labels, rng)?;
        let correct = state
            .test
            .iter()
            .filter(|(id, gold)| {
                let m = svm.decision(&features[id]).map(|m| m[0]).unwrap_or(0.0);
                (m > 0.0) == (*gold == Intent::Commercial)
            })
            .count();
        let accuracy = correct as f64 / state.test.len() as f64;

        state.iteration += 1;
        state.accuracy_history.push(accuracy);
        state.tricky_history.push(tricky);
        state.size_history.push(labels.len());
        if accuracy >= cfg.stop_threshold {
            converged = true;
            break;
        }
    }

    state.labeled = insertion
        .iter()
        .map(|id| {
            let (l, p) = labels[id];
            (*id, l, p)
        })
        .collect();
    let records = state
        .labeled
        .iter()
        .enumerate()
        .map(|(i, &(id, intent, provenance))| Record {
            record_id: i,
            query_id: id,
            tokens: tokens[&id].to_vec(),
            intent,
            categories: Vec::new(),
            split: Split::Unassigned,
            provenance,
        })
        .collect();
    Ok(ActiveLearningOutcome {
        dataset: LabeledDataset::new(records),
        state,
        converged,
        unlabeled: remaining,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn sv(p: &[(usize, f64)]) -> SparseVec {
        SparseVec::new(p.to_vec())
    }

    #[test]
    fn tricky_band() {
        let s = vec![(0, -0.05), (1, 0.5), (2, 0.01)];
        assert_eq!(find_tricky_samples(&s, 0.1), vec![2, 0]);
        assert!(find_tricky_samples(&s, 0.0).is_empty());
    }

    #[test]
    fn identical_neighbour_is_inherited() {
        let labeled = vec![
            (sv(&[(0, 1.0)]), Intent::NonCommercial),
            (sv(&[(1, 1.0)]), Intent::Commercial),
        ];
        let got = knn_expand(&labeled, &[sv(&[(0, 1.0)])], 1, 1.0).unwrap();
        assert_eq!(got, vec![(0, Intent::NonCommercial)]);
    }

    #[test]
    fn split_vote_is_rejected_at_full_agreement() {
        let labeled = vec![
            (sv(&[(0, 1.0)]), Intent::Commercial),
            (sv(&[(0, 1.0), (1, 0.1)]), Intent::Commercial),
            (sv(&[(0, 1.0), (2, 0.1)]), Intent::NonCommercial),
        ];
        let q = sv(&[(0, 1.0)]);
        assert!(knn_expand(&labeled, &[q.clone()], 3, 1.0).unwrap().is_empty());
        assert_eq!(knn_expand(&labeled, &[q], 3, 0.6).unwrap(), vec![(0, Intent::Commercial)]);
    }

    #[test]
    fn empty_pool_is_identity() {
        let labeled = vec![(sv(&[(0, 1.0)]), Intent::Commercial)];
        assert!(knn_expand(&labeled, &[], 1, 0.8).unwrap().is_empty());
    }

    #[test]
    fn single_class_seed_rejected() {
        struct Never;
        impl LabelOracle for Never {
            fn label(&self, _: QueryId) -> Result<crate::corpus::GoldLabel> {
                unreachable!()
            }
        }
        let q = PoolQuery {
            query_id: 0,
            tokens: tokenize("drill"),
        };
        let r = algorithm1_run(
            &[(q, Intent::Commercial)],
            &[],
            &Never,
            &ActiveLearningConfig::default(),
            &mut rand::thread_rng(),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
