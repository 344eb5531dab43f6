//! Per-class counts, macro/micro F1, minority-class reports and a paired
//! bootstrap.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerClassCounts {
    pub tp: Vec<u64>,
    pub fp: Vec<u64>,
    pub fn_: Vec<u64>,
}

impl PerClassCounts {
    pub fn new(n_classes: usize) -> Self {
        Self {
            tp: vec![0; n_classes],
            fp: vec![0; n_classes],
            fn_: vec![0; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.tp.len()
    }

    /// `2TP / (2TP + FP + FN)`, with 0/0 taken as 0.
    pub fn f1(&self, class: usize) -> f64 {
        f1_from(self.tp[class], self.fp[class], self.fn_[class])
    }

    pub fn support(&self, class: usize) -> u64 {
        self.tp[class] + self.fn_[class]
    }

    fn check_class(&self, c: usize) -> Result<()> {
        if c >= self.n_classes() {
            return Err(Error::Input(format!(
                "class {c} outside {} classes",
                self.n_classes()
            )));
        }
        Ok(())
    }
}

fn f1_from(tp: u64, fp: u64, fn_: u64) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Counts for single-label predictions.
pub fn count_single(pred: &[usize], gold: &[usize], n_classes: usize) -> Result<PerClassCounts> {
    if pred.len() != gold.len() {
        return Err(Error::Input(format!(
            "{} predictions for {} gold labels",
            pred.len(),
            gold.len()
        )));
    }
    let mut c = PerClassCounts::new(n_classes);
    for (&p, &g) in pred.iter().zip(gold) {
        c.check_class(p)?;
        c.check_class(g)?;
        if p == g {
            c.tp[p] += 1;
        } else {
            c.fp[p] += 1;
            c.fn_[g] += 1;
        }
    }
    Ok(c)
}

/// Counts for label sets, per (record, class) membership.
pub fn count_multi(
    pred: &[Vec<usize>],
    gold: &[Vec<usize>],
    n_classes: usize,
) -> Result<PerClassCounts> {
    if pred.len() != gold.len() {
        return Err(Error::Input(format!(
            "{} predictions for {} gold labels",
            pred.len(),
            gold.len()
        )));
    }
    let mut c = PerClassCounts::new(n_classes);
    let mut p_mask = vec![false; n_classes];
    let mut g_mask = vec![false; n_classes];
    for (p, g) in pred.iter().zip(gold) {
        p_mask.fill(false);
        g_mask.fill(false);
        for &k in p {
            c.check_class(k)?;
            p_mask[k] = true;
        }
        for &k in g {
            c.check_class(k)?;
            g_mask[k] = true;
        }
        for k in 0..n_classes {
            match (p_mask[k], g_mask[k]) {
                (true, true) => c.tp[k] += 1,
                (true, false) => c.fp[k] += 1,
                (false, true) => c.fn_[k] += 1,
                (false, false) => {}
            }
        }
    }
    Ok(c)
}

pub fn f1_macro(counts: &PerClassCounts) -> f64 {
    let n = counts.n_classes();
    if n == 0 {
        return 0.0;
    }
    (0..n).map(|c| counts.f1(c)).sum::<f64>() / n as f64
}

pub fn f1_micro(counts: &PerClassCounts) -> f64 {
    f1_from(
        counts.tp.iter().sum(),
        counts.fp.iter().sum(),
        counts.fn_.iter().sum(),
    )
}

/// Macro-F1 restricted to `classes`.
pub fn minority_report(counts: &PerClassCounts, classes: &[usize]) -> Result<f64> {
    if classes.is_empty() {
        return Err(Error::Input("empty minority class list".into()));
    }
    for &c in classes {
        counts.check_class(c)?;
    }
    Ok(classes.iter().map(|&c| counts.f1(c)).sum::<f64>() / classes.len() as f64)
}

/// The `k` classes with the lowest support, ties by ascending id.
pub fn rarest_classes(support: &[usize], k: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..support.len()).collect();
    ids.sort_by_key(|&c| (support[c], c));
    ids.truncate(k);
    ids.sort_unstable();
    ids
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub intent_macro_f1: f64,
    pub intent_micro_f1: f64,
    pub category_macro_f1: f64,
    pub category_micro_f1: f64,
}

pub const METRICS_HEADER: &str =
    "method\tintent_macro_f1\tintent_micro_f1\tcategory_macro_f1\tcategory_micro_f1";

pub fn format_metrics_tsv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
            r.method, r.intent_macro_f1, r.intent_micro_f1, r.category_macro_f1, r.category_micro_f1
        ));
    }
    out
}

pub fn write_metrics_tsv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_metrics_tsv(rows).as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Metric of A minus metric of B on the full sample.
    pub observed_diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fraction of resamples where A does not beat B.
    pub p_not_better: f64,
}

/// Paired bootstrap over record indices. `metric_a` and `metric_b` score a
/// resample given as a list of record indices.
pub fn paired_bootstrap<R, FA, FB>(
    n_records: usize,
    resamples: usize,
    confidence: f64,
    rng: &mut R,
    metric_a: FA,
    metric_b: FB,
) -> Result<BootstrapResult>
where
    R: Rng,
    FA: Fn(&[usize]) -> f64,
    FB: Fn(&[usize]) -> f64,
{
    if n_records == 0 || resamples == 0 {
        return Err(Error::Input("bootstrap needs records and resamples".into()));
    }
    if !(0.0..1.0).contains(&confidence) {
        return Err(Error::Config(format!("confidence {confidence} outside [0, 1)")));
    }
    let all: Vec<usize> = (0..n_records).collect();
    let observed_diff = metric_a(&all) - metric_b(&all);
    let mut diffs = Vec::with_capacity(resamples);
    let mut idx = vec![0; n_records];
    for _ in 0..resamples {
        idx.iter_mut().for_each(|i| *i = rng.gen_range(0..n_records));
        diffs.push(metric_a(&idx) - metric_b(&idx));
    }
    diffs.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0;
    let at = |q: f64| diffs[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok(BootstrapResult {
        observed_diff,
        ci_low: at(tail),
        ci_high: at(1.0 - tail),
        p_not_better: diffs.iter().filter(|&&d| d <= 0.0).count() as f64 / resamples as f64,
    })
}
