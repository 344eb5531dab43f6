use jointmap::corpus::{tokenize, Intent};
use jointmap::model::{decode_checkpoint, encode_checkpoint, Example, JointMap, ModelConfig, Vocab};
use jointmap::{JointMap32, JointMap64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vocab() -> Vocab {
    Vocab::build(&[tokenize("a b c d e f g h i j k")])
}

fn random_batch(rng: &mut ChaCha8Rng, n: usize, cfg: &ModelConfig, vocab: usize) -> Vec<Example> {
    (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=cfg.query_len + 2);
            let ids: Vec<usize> = (0..len.min(cfg.query_len)).map(|_| rng.gen_range(0..vocab)).collect();
            let intent = rng.gen_range(0..2);
            let categories = if intent == 0 {
                (0..cfg.n_categories).filter(|_| rng.gen_bool(0.4)).collect()
            } else {
                vec![]
            };
            Example { ids, intent, categories }
        })
        .collect()
}

fn check(cfg: ModelConfig, training: bool, seed: u64) {
    let v = vocab();
    let n = v.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = JointMap64::new(cfg.clone(), v, &mut rng).unwrap();
    let batch = random_batch(&mut rng, 5, &cfg, n);
    let report = m.gradcheck(&batch, seed, training, 1e-4).unwrap();
    assert!(report.passed, "max rel error {}", report.max_rel_error());
}

fn tiny() -> ModelConfig {
    ModelConfig {
        embed_dim: 4,
        query_len: 4,
        n_categories: 3,
        heads: 2,
        dropout: 0.0,
        ..ModelConfig::default()
    }
}

#[test]
fn gradcheck_tiny() {
    check(tiny(), false, 1);
}

#[test]
fn gradcheck_with_dropout_masks() {
    check(ModelConfig { dropout: 0.4, ..tiny() }, true, 2);
}

#[test]
fn gradcheck_single_and_many_heads() {
    for heads in [1, 3] {
        let cfg = ModelConfig { query_len: 3, n_categories: 2, heads, ..tiny() };
        check(cfg, false, 3 + heads as u64);
    }
}

#[test]
fn gradcheck_weighted_focal() {
    let cfg = ModelConfig {
        gamma: 2.5,
        alpha: vec![0.25, 1.0, 3.0],
        beta1: 0.8,
        beta2: 0.3,
        ..tiny()
    };
    check(cfg, false, 6);
}

#[test]
fn checkpoint_roundtrip_preserves_predictions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = JointMap64::new(ModelConfig { embed_dim: 6, query_len: 6, heads: 3, n_categories: 4, ..ModelConfig::default() }, vocab(), &mut rng).unwrap();
    let bytes = encode_checkpoint(&m).unwrap();
    let back: JointMap64 = decode_checkpoint(&bytes).unwrap();
    let narrow: JointMap32 = decode_checkpoint(&bytes).unwrap();
    for q in ["a b", "k", "zz a c d e f g h i j k"] {
        let t = tokenize(q);
        assert_eq!(back.predict(&t).unwrap(), m.predict(&t).unwrap());
        let (p64, p32) = (m.predict(&t).unwrap(), narrow.predict(&t).unwrap());
        for (a, b) in p64.category_scores.iter().zip(&p32.category_scores) {
            assert!((a - b).abs() < 1e-4);
        }
    }
}

#[test]
fn noncommercial_prediction_has_no_categories() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m: JointMap<f64> = JointMap::new(tiny(), vocab(), &mut rng).unwrap();
    for q in ["a", "b c", "d e f", "g h i j"] {
        let p = m.predict(&tokenize(q)).unwrap();
        if p.intent == Intent::NonCommercial {
            assert!(p.categories.is_empty());
        } else {
            assert_eq!(p.categories, p.raw_categories);
        }
    }
}
