use jointmap::baseline::{LinearSvm, SvmConfig, TfIdfVectorizer};
use jointmap::corpus::Intent;
use jointmap::datasets::{oversample_minority, split_dataset, LabeledDataset, Provenance, Record, Split};
use jointmap::model::loss::{focal_loss, loss_pc, total_loss};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dataset(intents: &[bool]) -> LabeledDataset {
    LabeledDataset::new(
        intents
            .iter()
            .enumerate()
            .map(|(i, &nc)| Record {
                record_id: i,
                query_id: i,
                tokens: vec![format!("q{i}")],
                intent: if nc { Intent::NonCommercial } else { Intent::Commercial },
                categories: if nc { vec![] } else { vec![i % 3] },
                split: Split::Unassigned,
                provenance: Provenance::Seed,
            })
            .collect(),
    )
}

fn doc() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["drill", "saw", "lamp", "how", "to", "fix"]), 1..5)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tfidf_vectors_are_unit_or_zero(docs in prop::collection::vec(doc(), 1..20), probe in doc()) {
        let v = TfIdfVectorizer::fit(&docs).unwrap();
        for d in docs.iter().chain(std::iter::once(&probe)) {
            let n = v.transform(d).norm();
            prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
        }
        let unseen = v.transform(&["zzz".to_string()]);
        prop_assert!(unseen.is_zero());
    }

    #[test]
    fn split_covers_every_record_once(intents in prop::collection::vec(prop::bool::weighted(0.2), 10..300), seed: u64) {
        let ds = dataset(&intents);
        let out = split_dataset(&ds, seed).unwrap();
        prop_assert_eq!(out.len(), ds.len());
        prop_assert!(out.records.iter().all(|r| r.split != Split::Unassigned));
        let n = ds.len() as f64;
        for (s, f) in [(Split::Train, 0.7), (Split::Val, 0.1), (Split::Test, 0.2)] {
            prop_assert!((out.count(s, None) as f64 - f * n).abs() <= 1.0);
            for i in Intent::ALL {
                let stratum = ds.count(Split::Unassigned, Some(i)) as f64;
                prop_assert!((out.count(s, Some(i)) as f64 - f * stratum).abs() <= 2.0);
            }
        }
        prop_assert_eq!(split_dataset(&ds, seed).unwrap(), out);
    }

    #[test]
    fn oversampling_reaches_target_minimally(
        intents in prop::collection::vec(prop::bool::weighted(0.1), 20..300),
        target in 0.05f64..0.9,
        seed: u64,
    ) {
        let ds = split_dataset(&dataset(&intents), seed).unwrap();
        let train = ds.count(Split::Train, None);
        let nc = ds.count(Split::Train, Some(Intent::NonCommercial));
        prop_assume!(nc > 0 && nc < train);
        let out = oversample_minority(&ds, target, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let added = out.len() - ds.len();
        let ratio = |m: usize| (nc + m) as f64 / (train + m) as f64;
        prop_assert!(ratio(added) >= target);
        prop_assert!(added == 0 || ratio(added - 1) < target);
        prop_assert_eq!(&out.records[..ds.len()], &ds.records[..]);
        for r in &out.records[ds.len()..] {
            prop_assert_eq!(r.split, Split::Train);
            prop_assert_eq!(r.intent, Intent::NonCommercial);
            prop_assert_eq!(&ds.records[r.query_id].tokens, &r.tokens);
        }
        for s in [Split::Val, Split::Test] {
            prop_assert_eq!(out.count(s, None), ds.count(s, None));
        }
    }

    #[test]
    fn focal_without_focusing_is_cross_entropy(
        scores in prop::collection::vec(-30.0f64..30.0, 1..12),
        bits in prop::collection::vec(any::<bool>(), 12),
    ) {
        let t = &bits[..scores.len()];
        let ones = vec![1.0; scores.len()];
        let f = focal_loss(&scores, t, &ones, 0.0).unwrap();
        prop_assert!((f - loss_pc(&scores, t).unwrap()).abs() <= 1e-12 * f.abs().max(1.0));
    }

    #[test]
    fn total_loss_is_linear_in_weights(f in 0.0f64..10.0, l in 0.0f64..10.0, b1 in 0.01f64..2.0, b2 in 0.01f64..2.0) {
        let at = |x: f64, y: f64| total_loss(f, l, x, y).unwrap();
        prop_assert!((at(b1, b2) - (b1 * at(1.0, 0.0) + b2 * at(0.0, 1.0))).abs() <= 1e-12);
    }
}

#[test]
fn svm_objective_decreases_overall() {
    let docs: Vec<Vec<String>> = (0..200)
        .map(|i| {
            let w = ["drill", "saw", "lamp", "bulb"][i % 4];
            vec![w.to_string(), format!("n{}", i % 7)]
        })
        .collect();
    let y: Vec<bool> = (0..200).map(|i| i % 4 < 2).collect();
    let v = TfIdfVectorizer::fit(&docs).unwrap();
    let x = v.transform_all(&docs);
    let svm = LinearSvm::train_binary(
        &x,
        &y,
        v.dim(),
        SvmConfig { epochs: 15, ..SvmConfig::default() },
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap();
    let obj = &svm.classes()[0].objective;
    assert_eq!(obj.len(), 15);
    assert!(obj.last().unwrap() < &obj[0]);
    let correct = x
        .iter()
        .zip(&y)
        .filter(|(xi, &yi)| (svm.decision(xi).unwrap()[0] > 0.0) == yi)
        .count();
    assert_eq!(correct, 200);
}
