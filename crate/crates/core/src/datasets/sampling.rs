use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LabeledDataset, Split};
use crate::corpus::Intent;
use crate::error::{Error, Result};

/// Train / validation / test shares.
pub const SPLIT_FRACTIONS: [f64; 3] = [0.7, 0.1, 0.2];

/// Duplicates random non-commercial train records until they make up at
/// least `target_ratio` of the train split. Copies get fresh record ids
/// and keep their query id. Other splits are untouched.
pub fn oversample_minority<R: Rng>(
    ds: &LabeledDataset,
    target_ratio: f64,
    rng: &mut R,
) -> Result<LabeledDataset> {
    if !(0.0..1.0).contains(&target_ratio) {
        return Err(Error::Config(format!(
            "oversampling target {target_ratio} must be in [0, 1)"
        )));
    }
    let minority: Vec<usize> = ds
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.split == Split::Train && r.intent == Intent::NonCommercial)
        .map(|(i, _)| i)
        .collect();
    let total = ds.count(Split::Train, None);
    if minority.is_empty() || minority.len() == total {
        return Err(Error::Config("train split must contain both intents".into()));
    }
    // smallest m with (nc + m) / (total + m) >= target
    let nc = minority.len();
    let reached = |m: usize| (nc + m) as f64 >= target_ratio * (total + m) as f64;
    let guess = ((target_ratio * total as f64 - nc as f64) / (1.0 - target_ratio)).ceil();
    let mut extra = guess.max(0.0) as usize;
    while extra > 0 && reached(extra - 1) {
        extra -= 1;
    }
    while !reached(extra) {
        extra += 1;
    }

    let mut out = ds.clone();
    let mut next = ds.next_record_id();
    for _ in 0..extra {
        let src = &ds.records[*minority.choose(rng).unwrap()];
        let mut copy = src.clone();
        copy.record_id = next;
        next += 1;
        out.records.push(copy);
    }
    Ok(out)
}

/// Stratified 70/10/20 split by intent, deterministic under `seed`.
///
/// Each stratum gets the difference of cumulatively rounded boundaries, so
/// overall split sizes are the rounded global shares and every stratum
/// stays within about one record of its exact share.
pub fn split_dataset(ds: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    if ds.len() < 10 {
        return Err(Error::Config(format!(
            "cannot split {} records, at least 10 are needed",
            ds.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ds.clone();
    let mut cum = 0usize;
    let cut = |frac: f64, n: usize| (frac * n as f64).round() as usize;
    let b1 = SPLIT_FRACTIONS[0];
    let b2 = SPLIT_FRACTIONS[0] + SPLIT_FRACTIONS[1];
    for intent in Intent::ALL {
        let mut idx: Vec<usize> = (0..out.records.len())
            .filter(|&i| out.records[i].intent == intent)
            .collect();
        idx.shuffle(&mut rng);
        let before = cum;
        cum += idx.len();
        let n_train = cut(b1, cum) - cut(b1, before);
        let n_train_val = cut(b2, cum) - cut(b2, before);
        for (pos, &i) in idx.iter().enumerate() {
            out.records[i].split = if pos < n_train {
                Split::Train
            } else if pos < n_train_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{Provenance, Record};

    fn dataset(n_c: usize, n_nc: usize) -> LabeledDataset {
        let records = (0..n_c + n_nc)
            .map(|i| Record {
                record_id: i,
                query_id: i,
                tokens: vec![format!("t{i}")],
                intent: if i < n_c {
                    Intent::Commercial
                } else {
                    Intent::NonCommercial
                },
                categories: if i < n_c { vec![0] } else { vec![] },
                split: Split::Unassigned,
                provenance: Provenance::Seed,
            })
            .collect();
        LabeledDataset::new(records)
    }

    fn all_train(mut ds: LabeledDataset) -> LabeledDataset {
        ds.records.iter_mut().for_each(|r| r.split = Split::Train);
        ds
    }

    #[test]
    fn oversample_to_balance() {
        let ds = all_train(dataset(985, 15));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = oversample_minority(&ds, 0.5, &mut rng).unwrap();
        assert_eq!(out.count(Split::Train, Some(Intent::NonCommercial)), 985);
        assert_eq!(out.count(Split::Train, Some(Intent::Commercial)), 985);
        let mut ids: Vec<usize> = out.records.iter().map(|r| r.record_id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), out.len());
        for r in &out.records[1000..] {
            assert!(r.query_id >= 985 && r.query_id < 1000);
        }
    }

    #[test]
    fn balanced_input_is_identity() {
        let ds = all_train(dataset(10, 10));
        let out = oversample_minority(&ds, 0.5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn oversampling_leaves_other_splits() {
        let ds = split_dataset(&dataset(900, 100), 3).unwrap();
        let out = oversample_minority(&ds, 0.5, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for s in [Split::Val, Split::Test] {
            let a: Vec<_> = ds.split(s).collect();
            let b: Vec<_> = out.split(s).collect();
            assert_eq!(a, b);
        }
        assert!(oversample_minority(&ds, 1.0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn split_hundred_exactly() {
        let out = split_dataset(&dataset(98, 2), 1).unwrap();
        assert_eq!(out.count(Split::Train, None), 70);
        assert_eq!(out.count(Split::Val, None), 10);
        assert_eq!(out.count(Split::Test, None), 20);
        let out = split_dataset(&dataset(100, 0), 1).unwrap();
        assert_eq!(
            [Split::Train, Split::Val, Split::Test].map(|s| out.count(s, None)),
            [70, 10, 20]
        );
    }

    #[test]
    fn split_is_deterministic_and_stratified() {
        let ds = dataset(985, 15);
        let a = split_dataset(&ds, 9).unwrap();
        assert_eq!(a, split_dataset(&ds, 9).unwrap());
        assert_ne!(a, split_dataset(&ds, 10).unwrap());
        for (s, f) in [Split::Train, Split::Val, Split::Test].into_iter().zip(SPLIT_FRACTIONS) {
            let nc = a.count(s, Some(Intent::NonCommercial)) as f64;
            assert!((nc - 15.0 * f).abs() <= 1.0, "{s}: {nc}");
        }
        assert!(split_dataset(&dataset(5, 4), 0).is_err());
    }
}
