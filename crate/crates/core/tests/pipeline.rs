use jointmap::baseline::TfIdfVectorizer;
use jointmap::corpus::{generate_corpus, Corpus, CorpusConfig, GoldLabel, Intent, LabelOracle};
use jointmap::datasets::{
    algorithm1_run, build_datasets, knn_expand, ActiveLearningConfig, BuildConfig, LabelSource,
    PoolQuery, Split,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seed_and_pool(corpus: &Corpus, n_c: usize, n_nc: usize, seed: u64) -> (Vec<(PoolQuery, Intent)>, Vec<PoolQuery>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = corpus.queries.iter().map(|q| q.id).collect();
    ids.shuffle(&mut rng);
    let mut seed_set = Vec::new();
    let mut pool = Vec::new();
    let (mut c, mut nc) = (0, 0);
    for id in ids {
        let q = corpus.query(id).unwrap();
        let pq = PoolQuery { query_id: id, tokens: q.tokens.clone() };
        match q.intent {
            Intent::Commercial if c < n_c => {
                c += 1;
                seed_set.push((pq, q.intent));
            }
            Intent::NonCommercial if nc < n_nc => {
                nc += 1;
                seed_set.push((pq, q.intent));
            }
            _ => pool.push(pq),
        }
    }
    (seed_set, pool)
}

#[test]
fn noncommercial_share_matches_config() {
    let cfg = CorpusConfig { n_queries: 50_000, ..CorpusConfig::desk(3) };
    let corpus = generate_corpus(&cfg).unwrap();
    let nc = corpus.queries.iter().filter(|q| q.intent == Intent::NonCommercial).count();
    let share = nc as f64 / corpus.queries.len() as f64;
    assert!((share - 0.015).abs() <= 0.002, "share {share}");
}

#[test]
fn oracle_labels_are_consistent() {
    let corpus = generate_corpus(&CorpusConfig::desk(4)).unwrap();
    for q in &corpus.queries {
        let g = corpus.label(q.id).unwrap();
        assert_eq!(g.intent, q.intent);
        assert!(g.categories.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.categories.is_empty(), g.intent == Intent::NonCommercial);
        assert!(g.categories.iter().all(|&c| c < corpus.n_categories()));
    }
    assert!(corpus.label(usize::MAX).is_err());
    assert_eq!(generate_corpus(&CorpusConfig::desk(4)).unwrap(), corpus);
}

#[test]
fn knn_expansion_is_accurate() {
    let corpus = generate_corpus(&CorpusConfig { n_queries: 2_000, ..CorpusConfig::desk(5) }).unwrap();
    let (seed_set, pool) = seed_and_pool(&corpus, 200, 25, 5);
    let pool = &pool[..1000];
    let docs: Vec<&[String]> = seed_set
        .iter()
        .map(|(q, _)| q.tokens.as_slice())
        .chain(pool.iter().map(|q| q.tokens.as_slice()))
        .collect();
    let v = TfIdfVectorizer::fit(&docs).unwrap();
    let labeled: Vec<_> = seed_set.iter().map(|(q, l)| (v.transform(&q.tokens), *l)).collect();
    let pool_vecs: Vec<_> = pool.iter().map(|q| v.transform(&q.tokens)).collect();
    let got = knn_expand(&labeled, &pool_vecs, 5, 0.8).unwrap();
    assert!(got.len() >= 100, "only {} labelled", got.len());
    let correct = got
        .iter()
        .filter(|(i, l)| corpus.label(pool[*i].query_id).unwrap().intent == *l)
        .count();
    assert!(correct as f64 / got.len() as f64 >= 0.95, "{correct}/{}", got.len());
}

#[test]
fn zero_stop_threshold_stops_after_one_iteration() {
    let corpus = generate_corpus(&CorpusConfig { n_queries: 1_500, ..CorpusConfig::desk(6) }).unwrap();
    let (seed_set, pool) = seed_and_pool(&corpus, 50, 10, 6);
    let cfg = ActiveLearningConfig { stop_threshold: 0.0, test_size: 200, ..ActiveLearningConfig::default() };
    let out = algorithm1_run(&seed_set, &pool, &corpus, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(out.state.iteration, 1);
    assert!(out.converged);
}

struct Disjoint;

impl LabelOracle for Disjoint {
    fn label(&self, id: usize) -> jointmap::Result<GoldLabel> {
        let commercial = id % 3 != 0;
        Ok(GoldLabel {
            intent: if commercial { Intent::Commercial } else { Intent::NonCommercial },
            categories: if commercial { vec![0] } else { vec![] },
        })
    }
}

#[test]
fn separable_pool_converges_quickly() {
    // the two intents draw from disjoint vocabularies
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let query = |id: usize, rng: &mut ChaCha8Rng| {
        let base = if id % 3 != 0 { 0 } else { 40 };
        let tokens = (0..rng.gen_range(1..4)).map(|_| format!("w{}", base + rng.gen_range(0..40))).collect();
        PoolQuery { query_id: id, tokens }
    };
    let all: Vec<PoolQuery> = (0..2_000).map(|id| query(id, &mut rng)).collect();
    let (seed, pool) = all.split_at(60);
    let seed_set: Vec<_> = seed.iter().map(|q| (q.clone(), Disjoint.label(q.query_id).unwrap().intent)).collect();
    let cfg = ActiveLearningConfig { stop_threshold: 0.99, max_iters: 5, ..ActiveLearningConfig::default() };
    let out = algorithm1_run(&seed_set, pool, &Disjoint, &cfg, &mut rng).unwrap();
    assert!(out.converged, "{:?}", out.state.accuracy_history);
    assert!(out.state.iteration <= 5);
    assert!(*out.state.accuracy_history.last().unwrap() >= 0.99);
    for &(id, l, _) in &out.state.labeled {
        assert_eq!(Disjoint.label(id).unwrap().intent, l);
    }
}

#[test]
fn pipeline_build_is_reproducible_and_balanced() {
    let corpus = generate_corpus(&CorpusConfig { n_queries: 2_000, ..CorpusConfig::desk(8) }).unwrap();
    let cfg = BuildConfig::default();
    let a = build_datasets(&corpus, &cfg, 8).unwrap();
    let b = build_datasets(&corpus, &cfg, 8).unwrap();
    assert_eq!(a.dataset, b.dataset);
    assert_eq!(a.report, b.report);
    let ds = &a.dataset;
    let train = ds.count(Split::Train, None) as f64;
    let nc = ds.count(Split::Train, Some(Intent::NonCommercial)) as f64;
    assert!(nc / train >= 0.5);
    assert_eq!(ds.count(Split::Unassigned, None), 0);
    for r in &ds.records {
        assert_eq!(r.categories.is_empty(), r.intent == Intent::NonCommercial);
    }
    assert_eq!(a.report.split_counts["train"], ds.count(Split::Train, None));
}

#[test]
fn gold_build_keeps_every_query() {
    let corpus = generate_corpus(&CorpusConfig { n_queries: 1_000, ..CorpusConfig::desk(9) }).unwrap();
    let cfg = BuildConfig { label_source: LabelSource::Gold, oversample_target: None, ..BuildConfig::default() };
    let out = build_datasets(&corpus, &cfg, 0).unwrap();
    assert_eq!(out.dataset.len(), 1_000);
    for r in &out.dataset.records {
        let g = corpus.label(r.query_id).unwrap();
        assert_eq!((r.intent, &r.categories), (g.intent, &g.categories));
    }
}
