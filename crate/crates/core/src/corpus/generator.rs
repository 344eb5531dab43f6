use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{
    AMBIGUOUS_SERVICE, AMBIGUOUS_SUFFIX, ATTRIBUTES, BRANDS, CATEGORIES, CITIES, FIXED_SECONDARY,
    FIXED_SELLERS, SERVICE_TEMPLATES,
};
use super::{
    tokenize, Category, ClickLog, ClickRecord, Corpus, CorpusConfig, Intent, Product, ProductId,
    Query, Taxonomy,
};
use crate::error::Result;

/// Retries before a duplicate query text is accepted.
const UNIQUE_ATTEMPTS: usize = 64;

struct Noun {
    text: String,
    primary: usize,
    categories: Vec<usize>,
    sellers: Vec<usize>,
}

struct Brand {
    name: String,
    nouns: Vec<usize>,
    categories: Vec<usize>,
}

struct Catalog {
    nouns: Vec<Noun>,
    brands: Vec<Brand>,
    /// (brand, noun) -> pid
    products: BTreeMap<(usize, usize), ProductId>,
    nouns_by_category: Vec<Vec<usize>>,
}

struct Draft {
    text: String,
    intent: Intent,
    categories: Vec<usize>,
    targets: Vec<ProductId>,
    ambiguous: bool,
}

/// Generates a taxonomy, labelled queries and a click log from `cfg`.
/// Identical configs produce identical corpora.
pub fn generate_corpus(cfg: &CorpusConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let categories: Vec<Category> = (0..cfg.n_categories)
        .map(|id| Category {
            id,
            name: CATEGORIES
                .get(id)
                .map(|(n, _)| n.to_string())
                .unwrap_or_else(|| format!("category {id}")),
        })
        .collect();

    let catalog = build_catalog(cfg, &categories, &mut rng);
    let products: Vec<Product> = catalog
        .products
        .iter()
        .map(|(&(b, n), &pid)| {
            let brand = &catalog.brands[b];
            let noun = &catalog.nouns[n];
            Product {
                pid,
                tokens: tokenize(&format!("{} {}", brand.name, noun.text)),
                categories: noun.categories.clone(),
            }
        })
        .collect();
    let taxonomy = Taxonomy {
        categories,
        products,
    };

    let n_nc = (cfg.noncommercial_fraction * cfg.n_queries as f64).round() as usize;
    let n_nc = n_nc.min(cfg.n_queries);
    let n_c = cfg.n_queries - n_nc;

    let mut plan: Vec<(Intent, Option<usize>, bool)> = Vec::with_capacity(cfg.n_queries);
    let quotas = category_quotas(n_c, cfg.n_categories, cfg.skew);
    let mut commercial: Vec<usize> = quotas
        .iter()
        .enumerate()
        .flat_map(|(c, &k)| std::iter::repeat(c).take(k))
        .collect();
    commercial.shuffle(&mut rng);
    let n_amb_c = (cfg.ambiguity_rate * n_c as f64).round() as usize;
    for (i, c) in commercial.into_iter().enumerate() {
        plan.push((Intent::Commercial, Some(c), i < n_amb_c));
    }
    let n_amb_nc = (cfg.ambiguity_rate * n_nc as f64).round() as usize;
    for i in 0..n_nc {
        plan.push((Intent::NonCommercial, None, i < n_amb_nc));
    }
    plan.shuffle(&mut rng);

    let mut seen = HashSet::with_capacity(plan.len());
    let mut queries = Vec::with_capacity(plan.len());
    let mut clicks = Vec::new();
    for (id, (intent, primary, ambiguous)) in plan.into_iter().enumerate() {
        let mut draft = None;
        for _ in 0..UNIQUE_ATTEMPTS {
            let d = match primary {
                Some(c) => draft_commercial(cfg, &catalog, c, ambiguous, &mut rng),
                None => draft_service(&catalog, ambiguous, &mut rng),
            };
            let fresh = !seen.contains(&d.text);
            draft = Some(d);
            if fresh {
                break;
            }
        }
        let d = draft.expect("at least one attempt");
        debug_assert_eq!(d.intent, intent);
        seen.insert(d.text.clone());

        if d.intent == Intent::Commercial {
            clicks.extend(simulate_clicks(cfg, id, &d.targets, taxonomy.products.len(), &mut rng));
        }
        queries.push(Query {
            id,
            tokens: tokenize(&d.text),
            text: d.text,
            intent: d.intent,
            categories: d.categories,
            ambiguous: d.ambiguous,
        });
    }

    Corpus::new(taxonomy, queries, ClickLog { records: clicks })
}

/// Largest-remainder apportionment of `total` over categories with weight
/// `(rank + 1)^-skew`. Non-increasing in rank.
pub(crate) fn category_quotas(total: usize, n: usize, skew: f64) -> Vec<usize> {
    let weights: Vec<f64> = (0..n).map(|k| ((k + 1) as f64).powf(-skew)).collect();
    let z: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / z * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps lower ranks first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap()
    });
    for &k in &order {
        if left == 0 {
            break;
        }
        counts[k] += 1;
        left -= 1;
    }
    counts
}

fn build_catalog(cfg: &CorpusConfig, categories: &[Category], rng: &mut ChaCha8Rng) -> Catalog {
    let n_cat = categories.len();
    let base = cfg.vocab_size / n_cat;
    let extra = cfg.vocab_size % n_cat;

    let mut nouns = Vec::with_capacity(cfg.vocab_size);
    let mut nouns_by_category = vec![Vec::new(); n_cat];
    for (c, cat) in categories.iter().enumerate() {
        let count = base + usize::from(c < extra);
        let builtin: &[&str] = CATEGORIES.get(c).map(|(_, n)| *n).unwrap_or(&[]);
        let stem = cat.name.split_whitespace().next().unwrap_or("item").to_string();
        for k in 0..count {
            let text = builtin
                .get(k)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("{stem}-item{k}"));
            nouns_by_category[c].push(nouns.len());
            nouns.push(Noun {
                text,
                primary: c,
                categories: vec![c],
                sellers: Vec::new(),
            });
        }
    }

    // Cross-listings only point at more popular categories so the long
    // tail stays a tail.
    let category_index = |name: &str| categories.iter().position(|c| c.name == name);
    for noun in nouns.iter_mut() {
        if noun.primary == 0 {
            continue;
        }
        let fixed = FIXED_SECONDARY
            .iter()
            .find(|(n, _)| *n == noun.text)
            .and_then(|(_, cat)| category_index(cat))
            .filter(|&c| c < noun.primary);
        let secondary = match fixed {
            Some(c) => Some(c),
            None if rng.gen::<f64>() < cfg.secondary_rate => Some(rng.gen_range(0..noun.primary)),
            None => None,
        };
        if let Some(s) = secondary {
            noun.categories.push(s);
            noun.categories.sort_unstable();
        }
    }

    let n_brands = (nouns.len() / 2).clamp(4, BRANDS.len().max(4));
    let mut brands: Vec<Brand> = (0..n_brands)
        .map(|b| Brand {
            name: BRANDS
                .get(b)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("brand{b}")),
            nouns: Vec::new(),
            categories: Vec::new(),
        })
        .collect();

    let mut fixed_brands = BTreeSet::new();
    for (brand, items) in FIXED_SELLERS {
        let Some(b) = brands.iter().position(|x| x.name == *brand) else {
            continue;
        };
        fixed_brands.insert(b);
        for item in *items {
            if let Some(n) = nouns.iter().position(|x| x.text == *item) {
                brands[b].nouns.push(n);
            }
        }
    }
    let open: Vec<usize> = (0..n_brands).filter(|b| !fixed_brands.contains(b)).collect();
    for n in 0..nouns.len() {
        let k = rng.gen_range(1..=3usize).min(open.len());
        for &b in open.choose_multiple(rng, k) {
            brands[b].nouns.push(n);
        }
    }
    for b in 0..n_brands {
        if brands[b].nouns.is_empty() {
            let n = rng.gen_range(0..nouns.len());
            brands[b].nouns.push(n);
        }
    }

    let mut products = BTreeMap::new();
    for (b, brand) in brands.iter_mut().enumerate() {
        brand.nouns.sort_unstable();
        brand.nouns.dedup();
        let mut cats = BTreeSet::new();
        for &n in &brand.nouns {
            nouns[n].sellers.push(b);
            cats.extend(nouns[n].categories.iter().copied());
            let pid = products.len();
            products.insert((b, n), pid);
        }
        brand.categories = cats.into_iter().collect();
    }
    // BTreeMap iteration is (brand, noun) ordered; renumber so pid order
    // matches that ordering.
    for (i, pid) in products.values_mut().enumerate() {
        *pid = i;
    }

    Catalog {
        nouns,
        brands,
        products,
        nouns_by_category,
    }
}

fn fill(template: &str, noun: &str, brand: &str, attr: &str, city: &str) -> String {
    template
        .replace("{noun}", noun)
        .replace("{brand}", brand)
        .replace("{attr}", attr)
        .replace("{city}", city)
}

fn draft_commercial(
    cfg: &CorpusConfig,
    catalog: &Catalog,
    primary: usize,
    ambiguous: bool,
    rng: &mut ChaCha8Rng,
) -> Draft {
    let attr = *ATTRIBUTES.choose(rng).unwrap();
    let noun_id = *catalog.nouns_by_category[primary].choose(rng).unwrap();
    let noun = &catalog.nouns[noun_id];
    let all_noun_products = |catalog: &Catalog| -> Vec<ProductId> {
        noun.sellers
            .iter()
            .map(|&b| catalog.products[&(b, noun_id)])
            .collect()
    };

    if ambiguous {
        let template = *AMBIGUOUS_SERVICE.choose(rng).unwrap();
        let text = format!("{} {AMBIGUOUS_SUFFIX}", fill(template, &noun.text, "", attr, ""));
        return Draft {
            text,
            intent: Intent::Commercial,
            categories: noun.categories.clone(),
            targets: all_noun_products(catalog),
            ambiguous: true,
        };
    }

    if rng.gen::<f64>() < cfg.brand_only_rate {
        let candidates: Vec<usize> = (0..catalog.brands.len())
            .filter(|&b| catalog.brands[b].categories.contains(&primary))
            .collect();
        if let Some(&b) = candidates.choose(rng) {
            let brand = &catalog.brands[b];
            return Draft {
                text: format!("{attr} {}", brand.name),
                intent: Intent::Commercial,
                categories: brand.categories.clone(),
                targets: brand.nouns.iter().map(|&n| catalog.products[&(b, n)]).collect(),
                ambiguous: false,
            };
        }
    }

    let b = *noun.sellers.choose(rng).expect("every noun has a seller");
    let brand = &catalog.brands[b].name;
    let single = vec![catalog.products[&(b, noun_id)]];
    let roll = rng.gen::<f64>();
    let (text, targets) = if roll < 0.30 {
        (format!("{attr} {brand} {}", noun.text), single)
    } else if roll < 0.55 {
        (format!("{brand} {}", noun.text), single)
    } else if roll < 0.65 {
        (noun.text.clone(), all_noun_products(catalog))
    } else if roll < 0.80 {
        (format!("{} {attr}", noun.text), all_noun_products(catalog))
    } else {
        (format!("{attr} {}", noun.text), all_noun_products(catalog))
    };
    Draft {
        text,
        intent: Intent::Commercial,
        categories: noun.categories.clone(),
        targets,
        ambiguous: false,
    }
}

fn draft_service(catalog: &Catalog, ambiguous: bool, rng: &mut ChaCha8Rng) -> Draft {
    let noun = &catalog.nouns.choose(rng).unwrap().text;
    let brand = &catalog.brands.choose(rng).unwrap().name;
    let attr = *ATTRIBUTES.choose(rng).unwrap();
    let city = *CITIES.choose(rng).unwrap();
    let template = if ambiguous {
        *AMBIGUOUS_SERVICE.choose(rng).unwrap()
    } else {
        *SERVICE_TEMPLATES.choose(rng).unwrap()
    };
    Draft {
        text: fill(template, noun, brand, attr, city),
        intent: Intent::NonCommercial,
        categories: Vec::new(),
        targets: Vec::new(),
        ambiguous,
    }
}

fn simulate_clicks(
    cfg: &CorpusConfig,
    query_id: usize,
    targets: &[ProductId],
    n_products: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<ClickRecord> {
    let total = rng.gen_range(cfg.clicks_min..=cfg.clicks_max);
    let mut counts: BTreeMap<ProductId, u64> = BTreeMap::new();
    for _ in 0..total {
        let pid = if targets.is_empty() || rng.gen::<f64>() < cfg.click_noise {
            rng.gen_range(0..n_products)
        } else {
            *targets.choose(rng).unwrap()
        };
        *counts.entry(pid).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(pid, count)| ClickRecord {
            query_id,
            pid,
            count,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_corpus;

    fn small(seed: u64) -> CorpusConfig {
        CorpusConfig {
            n_queries: 2_000,
            ..CorpusConfig::desk(seed)
        }
    }

    #[test]
    fn quotas_are_monotone_and_exact() {
        for skew in [0.5, 1.0, 2.0, 3.0] {
            let q = category_quotas(4_925, 8, skew);
            assert_eq!(q.iter().sum::<usize>(), 4_925);
            assert!(q.windows(2).all(|w| w[0] >= w[1]), "{q:?}");
        }
        assert_eq!(category_quotas(10, 5, 0.0), vec![2, 2, 2, 2, 2]);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_corpus(&small(7)).unwrap();
        let b = generate_corpus(&small(7)).unwrap();
        let da = tempfile::tempdir().unwrap();
        let db = tempfile::tempdir().unwrap();
        write_corpus(da.path(), &a).unwrap();
        write_corpus(db.path(), &b).unwrap();
        for f in ["taxonomy.tsv", "queries.tsv", "clicks.tsv"] {
            let x = std::fs::read(da.path().join(f)).unwrap();
            let y = std::fs::read(db.path().join(f)).unwrap();
            assert_eq!(x, y, "{f} differs");
        }
        let c = generate_corpus(&small(8)).unwrap();
        assert_ne!(a.queries, c.queries);
    }

    #[test]
    fn storefront_examples_are_reachable() {
        let corpus = generate_corpus(&CorpusConfig {
            n_queries: 20_000,
            noncommercial_fraction: 0.2,
            ..CorpusConfig::desk(3)
        })
        .unwrap();
        let tools = 0;
        let electrical = 1;
        let lighting = 2;
        let ryobi = corpus
            .queries
            .iter()
            .find(|q| q.text == "18 volt ryobi")
            .expect("brand-only ryobi query");
        assert_eq!(ryobi.intent, Intent::Commercial);
        assert_eq!(ryobi.categories, vec![tools, electrical, lighting]);

        let tiles = corpus
            .queries
            .iter()
            .find(|q| q.text == "how to install my tiles")
            .expect("installation query");
        assert_eq!(tiles.intent, Intent::NonCommercial);
        assert!(tiles.categories.is_empty());
    }

    #[test]
    fn labels_follow_intent() {
        let corpus = generate_corpus(&small(1)).unwrap();
        for q in &corpus.queries {
            assert!(!q.tokens.is_empty());
            assert_eq!(q.intent == Intent::NonCommercial, q.categories.is_empty());
        }
    }

    #[test]
    fn most_clicked_product_is_in_gold_without_noise() {
        let corpus = generate_corpus(&CorpusConfig {
            click_noise: 0.0,
            ..small(5)
        })
        .unwrap();
        let mut best: BTreeMap<usize, (u64, usize)> = BTreeMap::new();
        for r in &corpus.clicks.records {
            let e = best.entry(r.query_id).or_insert((0, r.pid));
            if r.count > e.0 {
                *e = (r.count, r.pid);
            }
        }
        for q in corpus.queries.iter().filter(|q| q.intent == Intent::Commercial) {
            let (_, pid) = best[&q.id];
            let cats = &corpus.taxonomy.product(pid).unwrap().categories;
            assert!(cats.iter().any(|c| q.categories.contains(c)), "query {}", q.text);
        }
    }

    #[test]
    fn ambiguous_pairs_differ_by_trailing_token() {
        let corpus = generate_corpus(&CorpusConfig {
            noncommercial_fraction: 0.3,
            ambiguity_rate: 0.3,
            ..small(2)
        })
        .unwrap();
        let amb: Vec<&Query> = corpus.queries.iter().filter(|q| q.ambiguous).collect();
        assert!(amb.iter().any(|q| q.intent == Intent::Commercial));
        assert!(amb.iter().any(|q| q.intent == Intent::NonCommercial));
        for q in amb {
            let last = q.tokens.last().unwrap();
            match q.intent {
                Intent::Commercial => assert_eq!(last, AMBIGUOUS_SUFFIX),
                Intent::NonCommercial => assert!(last == "installation" || last == "repair"),
            }
        }
    }

    #[test]
    fn tiny_vocabulary_rejected() {
        let cfg = CorpusConfig {
            vocab_size: 3,
            ..CorpusConfig::desk(0)
        };
        assert!(matches!(generate_corpus(&cfg), Err(crate::Error::Config(_))));
    }
}
