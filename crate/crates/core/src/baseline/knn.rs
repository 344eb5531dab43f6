use std::cmp::Ordering;

use super::tfidf::SparseVec;
use crate::error::{Error, Result};

/// Cosine distance `1 - cos(a, b)`; a zero vector has cosine 0 to anything.
pub fn cosine_distance(a: &SparseVec, b: &SparseVec) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    /// `(id, distance)` in ascending distance, ties by ascending id.
    pub hits: Vec<(usize, f64)>,
    /// Set when fewer than `k` vectors were indexed.
    pub truncated: bool,
}

/// Exact nearest-neighbour search by cosine distance. Ids are insertion
/// positions.
#[derive(Debug, Clone, Default)]
pub struct KnnIndex {
    vectors: Vec<SparseVec>,
    norms: Vec<f64>,
}

impl KnnIndex {
    pub fn new(vectors: Vec<SparseVec>) -> Self {
        let norms = vectors.iter().map(SparseVec::norm).collect();
        Self { vectors, norms }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&SparseVec> {
        self.vectors.get(id)
    }

    fn distance(&self, id: usize, q: &SparseVec, qn: f64) -> f64 {
        let n = self.norms[id];
        if n == 0.0 || qn == 0.0 {
            return 1.0;
        }
        1.0 - (self.vectors[id].dot(q) / (n * qn)).clamp(-1.0, 1.0)
    }

    pub fn query(&self, q: &SparseVec, k: usize) -> Result<Neighbors> {
        if self.vectors.is_empty() {
            return Err(Error::Input("knn query against an empty index".into()));
        }
        if k == 0 {
            return Err(Error::Config("knn k must be >= 1".into()));
        }
        let qn = q.norm();
        let mut all: Vec<(usize, f64)> = (0..self.vectors.len())
            .map(|id| (id, self.distance(id, q, qn)))
            .collect();
        let cmp = by_distance_then_id;
        let truncated = k > all.len();
        let k = k.min(all.len());
        if k < all.len() {
            all.select_nth_unstable_by(k - 1, cmp);
            all.truncate(k);
        }
        all.sort_unstable_by(cmp);
        Ok(Neighbors {
            hits: all,
            truncated,
        })
    }
}

pub(crate) fn by_distance_then_id(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}
