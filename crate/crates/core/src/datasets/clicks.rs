use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CategoryId, ClickLog, QueryId, Taxonomy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Algorithm2Report {
    pub kept: usize,
    /// Queries with clicks but no category above the threshold.
    pub dropped_empty: usize,
    pub dropped_zero_clicks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Algorithm2Output {
    /// Kept queries in input order with their sorted category sets.
    pub labels: Vec<(QueryId, Vec<CategoryId>)>,
    pub report: Algorithm2Report,
}

/// Category labels from clicks: a category is attached when its share of
/// the query's clicks is strictly above `r`. A click on a product listed
/// under several categories counts once for each of them.
///
/// `r` is compared exactly as the rational value of the given float.
pub fn algorithm2_run(
    queries: &[QueryId],
    clicks: &ClickLog,
    taxonomy: &Taxonomy,
    r: f64,
) -> Result<Algorithm2Output> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Config(format!("click-rate threshold {r} outside [0, 1]")));
    }
    let threshold = BigRational::from_float(r).expect("finite threshold");

    let mut per_query: HashMap<QueryId, Vec<(usize, u64)>> = HashMap::new();
    for rec in &clicks.records {
        per_query.entry(rec.query_id).or_default().push((rec.pid, rec.count));
    }
    for rec in &clicks.records {
        if taxonomy.product(rec.pid).is_none() {
            return Err(Error::Lookup(format!("click on unknown product {}", rec.pid)));
        }
    }

    enum Outcome {
        Kept(Vec<CategoryId>),
        Empty,
        NoClicks,
    }
    let outcomes: Vec<Outcome> = queries
        .par_iter()
        .map(|q| {
            let Some(list) = per_query.get(q) else {
                return Outcome::NoClicks;
            };
            let total: u64 = list.iter().map(|&(_, c)| c).sum();
            if total == 0 {
                return Outcome::NoClicks;
            }
            let mut per_cat: BTreeMap<CategoryId, u64> = BTreeMap::new();
            for &(pid, count) in list {
                let product = taxonomy.product(pid).expect("checked above");
                for &c in &product.categories {
                    *per_cat.entry(c).or_default() += count;
                }
            }
            let total = BigInt::from(total);
            let kept: Vec<CategoryId> = per_cat
                .into_iter()
                .filter(|&(_, n)| BigRational::new(BigInt::from(n), total.clone()) > threshold)
                .map(|(c, _)| c)
                .collect();
            if kept.is_empty() {
                Outcome::Empty
            } else {
                Outcome::Kept(kept)
            }
        })
        .collect();

    let mut report = Algorithm2Report::default();
    let mut labels = Vec::new();
    for (q, o) in queries.iter().zip(outcomes) {
        match o {
            Outcome::Kept(c) => {
                report.kept += 1;
                labels.push((*q, c));
            }
            Outcome::Empty => report.dropped_empty += 1,
            Outcome::NoClicks => report.dropped_zero_clicks += 1,
        }
    }
    Ok(Algorithm2Output { labels, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Category, ClickRecord, Product};

    fn taxonomy(products: &[&[usize]]) -> Taxonomy {
        Taxonomy {
            categories: (0..3)
                .map(|id| Category {
                    id,
                    name: format!("c{id}"),
                })
                .collect(),
            products: products
                .iter()
                .enumerate()
                .map(|(pid, c)| Product {
                    pid,
                    tokens: vec![format!("p{pid}")],
                    categories: c.to_vec(),
                })
                .collect(),
        }
    }

    fn log(recs: &[(usize, usize, u64)]) -> ClickLog {
        ClickLog {
            records: recs
                .iter()
                .map(|&(query_id, pid, count)| ClickRecord {
                    query_id,
                    pid,
                    count,
                })
                .collect(),
        }
    }

    #[test]
    fn single_product() {
        let t = taxonomy(&[&[0]]);
        let out = algorithm2_run(&[0], &log(&[(0, 0, 7)]), &t, 0.99).unwrap();
        assert_eq!(out.labels, vec![(0, vec![0])]);
    }

    #[test]
    fn six_three_one() {
        let t = taxonomy(&[&[0], &[1], &[2]]);
        let l = log(&[(0, 0, 6), (0, 1, 3), (0, 2, 1)]);
        let out = algorithm2_run(&[0], &l, &t, 0.25).unwrap();
        assert_eq!(out.labels, vec![(0, vec![0, 1])]);
        // strictly greater: 0.1 is not above 0.1
        let out = algorithm2_run(&[0], &l, &t, 0.1).unwrap();
        assert_eq!(out.labels, vec![(0, vec![0, 1])]);
    }

    #[test]
    fn threshold_one_drops_everything() {
        let t = taxonomy(&[&[0], &[1, 2]]);
        let l = log(&[(0, 0, 5), (1, 1, 2), (1, 0, 2)]);
        let out = algorithm2_run(&[0, 1, 2], &l, &t, 1.0).unwrap();
        assert!(out.labels.is_empty());
        assert_eq!(out.report.dropped_empty, 2);
        assert_eq!(out.report.dropped_zero_clicks, 1);
    }

    #[test]
    fn zero_count_clicks_are_no_clicks() {
        let t = taxonomy(&[&[0]]);
        let out = algorithm2_run(&[0], &log(&[(0, 0, 0)]), &t, 0.1).unwrap();
        assert_eq!(out.report.dropped_zero_clicks, 1);
    }

    #[test]
    fn bad_threshold() {
        let t = taxonomy(&[&[0]]);
        assert!(algorithm2_run(&[0], &log(&[]), &t, 1.5).is_err());
    }
}
