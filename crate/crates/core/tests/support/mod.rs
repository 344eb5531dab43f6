//! Brute-force reference implementations and random instance generators
//! shared by the integration tests.
#![allow(dead_code)]

use jointmap::baseline::SparseVec;
use jointmap::corpus::{Category, ClickLog, ClickRecord, Product, Taxonomy};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

/// A random taxonomy, click log and query list for the click-label oracle.
pub struct ClickCase {
    pub taxonomy: Taxonomy,
    pub clicks: ClickLog,
    pub queries: Vec<usize>,
    pub r: f64,
}

pub fn random_click_case<R: Rng>(rng: &mut R) -> ClickCase {
    let n_cat = rng.gen_range(1..=6);
    let n_prod = rng.gen_range(1..=15);
    let taxonomy = Taxonomy {
        categories: (0..n_cat)
            .map(|id| Category {
                id,
                name: format!("c{id}"),
            })
            .collect(),
        products: (0..n_prod)
            .map(|pid| {
                let mut cats: Vec<usize> = (0..rng.gen_range(1..=2.min(n_cat)))
                    .map(|_| rng.gen_range(0..n_cat))
                    .collect();
                cats.sort_unstable();
                cats.dedup();
                Product {
                    pid,
                    tokens: vec![format!("p{pid}")],
                    categories: cats,
                }
            })
            .collect(),
    };
    let n_q = rng.gen_range(1..=200);
    let mut records = Vec::new();
    for q in 0..n_q {
        for _ in 0..rng.gen_range(0..=4) {
            records.push(ClickRecord {
                query_id: q,
                pid: rng.gen_range(0..n_prod),
                count: rng.gen_range(0..=12),
            });
        }
    }
    // a few queries never clicked and a few listed that are not in the log
    let queries: Vec<usize> = (0..n_q + rng.gen_range(0..5)).collect();
    let r = match rng.gen_range(0..4) {
        0 => 0.0,
        1 => [0.1, 0.25, 0.5, 1.0][rng.gen_range(0..4)],
        _ => rng.gen::<f64>(),
    };
    ClickCase {
        taxonomy,
        clicks: ClickLog { records },
        queries,
        r,
    }
}

/// Per query: kept category lists, then (kept, dropped_empty, dropped_zero).
pub fn click_label_oracle(c: &ClickCase) -> (Vec<(usize, Vec<usize>)>, (usize, usize, usize)) {
    let r = BigRational::from_float(c.r).unwrap();
    let n_cat = c.taxonomy.categories.len();
    let mut labels = Vec::new();
    let (mut kept, mut empty, mut zero) = (0, 0, 0);
    for &q in &c.queries {
        let mut per_cat = vec![0u64; n_cat];
        let mut total = 0u64;
        for rec in c.clicks.records.iter().filter(|x| x.query_id == q) {
            total += rec.count;
            let prod = c.taxonomy.products.iter().find(|p| p.pid == rec.pid).unwrap();
            for &cat in &prod.categories {
                per_cat[cat] += rec.count;
            }
        }
        if total == 0 {
            zero += 1;
            continue;
        }
        // n / total > r  <=>  n * den(r) > num(r) * total
        let cats: Vec<usize> = (0..n_cat)
            .filter(|&k| {
                BigInt::from(per_cat[k]) * r.denom() > r.numer() * BigInt::from(total)
            })
            .collect();
        if cats.is_empty() {
            empty += 1;
        } else {
            kept += 1;
            labels.push((q, cats));
        }
    }
    (labels, (kept, empty, zero))
}

/// Random predicted and gold label sets over `n` classes.
pub fn random_label_sets<R: Rng>(rng: &mut R) -> (Vec<Vec<usize>>, Vec<Vec<usize>>, usize) {
    let n = rng.gen_range(1..=8);
    let records = rng.gen_range(1..=60);
    let draw = |rng: &mut R| {
        let mut s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        s.sort_unstable();
        s
    };
    let pred = (0..records).map(|_| draw(rng)).collect();
    let gold = (0..records).map(|_| draw(rng)).collect();
    (pred, gold, n)
}

/// Macro and micro F1 from precision and recall, enumerating every
/// (record, class) pair.
pub fn f1_oracle(pred: &[Vec<usize>], gold: &[Vec<usize>], n: usize) -> (f64, f64) {
    let harmonic = |tp: f64, p: f64, g: f64| {
        if tp == 0.0 {
            return 0.0;
        }
        let precision = tp / p;
        let recall = tp / g;
        2.0 * precision * recall / (precision + recall)
    };
    let (mut all_tp, mut all_p, mut all_g) = (0.0, 0.0, 0.0);
    let mut sum = 0.0;
    for c in 0..n {
        let (mut tp, mut p, mut g) = (0.0, 0.0, 0.0);
        for (ps, gs) in pred.iter().zip(gold) {
            let in_p = ps.contains(&c);
            let in_g = gs.contains(&c);
            p += in_p as u8 as f64;
            g += in_g as u8 as f64;
            tp += (in_p && in_g) as u8 as f64;
        }
        sum += harmonic(tp, p, g);
        all_tp += tp;
        all_p += p;
        all_g += g;
    }
    (sum / n as f64, harmonic(all_tp, all_p, all_g))
}

pub fn random_sparse<R: Rng>(rng: &mut R, dim: usize) -> SparseVec {
    let mut pairs = Vec::new();
    for i in 0..dim {
        if rng.gen_bool(0.3) {
            pairs.push((i, rng.gen_range(-1.0..1.0)));
        }
    }
    SparseVec::new(pairs)
}

/// Nearest neighbours by dense cosine distance and a full stable sort.
pub fn knn_oracle(vectors: &[SparseVec], q: &SparseVec, k: usize, dim: usize) -> Vec<(usize, f64)> {
    let dense = |v: &SparseVec| {
        let mut d = vec![0.0; dim];
        for (i, x) in v.iter() {
            d[i] = x;
        }
        d
    };
    let qd = dense(q);
    let qn = qd.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut all: Vec<(usize, f64)> = vectors
        .iter()
        .enumerate()
        .map(|(id, v)| {
            let vd = dense(v);
            let vn = vd.iter().map(|x| x * x).sum::<f64>().sqrt();
            let dist = if vn == 0.0 || qn == 0.0 {
                1.0
            } else {
                let dot: f64 = vd.iter().zip(&qd).map(|(a, b)| a * b).sum();
                1.0 - (dot / (vn * qn)).clamp(-1.0, 1.0)
            };
            (id, dist)
        })
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}
