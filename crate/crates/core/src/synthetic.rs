//! Seeded synthetic corpora for tests, demos and the end-to-end benchmark.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data_io::{Dataset, RawReview};
use crate::rng::SeedRng;
use crate::text::TokenDoc;
use crate::vectorize::DocEmbeddings;

/// Words typical of label 1 (genuine, specific reviews).
pub const GENUINE_WORDS: [&str; 30] = [
    "battery", "charger", "screen", "durable", "sturdy", "warranty", "measured", "installed",
    "returned", "weeks", "months", "manual", "setup", "cable", "fits", "sizing", "compared",
    "previous", "model", "heavier", "lighter", "replacement", "customer", "service", "shipping",
    "packaging", "instructions", "assembly", "noise", "temperature",
];

/// Words typical of label 0 (fake, generic praise).
pub const FAKE_WORDS: [&str; 30] = [
    "amazing", "best", "awesome", "love", "perfect", "excellent", "buy", "fantastic", "wonderful",
    "incredible", "highly", "recommend", "five", "stars", "ever", "super", "great", "totally",
    "worth", "absolutely", "brilliant", "outstanding", "superb", "fabulous", "unbelievable",
    "everyone", "deal", "wow", "omg", "seller",
];

pub const NEUTRAL_WORDS: [&str; 20] = [
    "product", "item", "bought", "order", "use", "day", "time", "work", "thing", "price", "brand",
    "color", "size", "box", "store", "online", "friend", "gift", "home", "kitchen",
];

const FILLER: [&str; 8] = ["the", "and", "it", "was", "this", "is", "a", "i"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReviewCorpusConfig {
    pub n_reviews: usize,
    pub seed: u64,
    /// Share of content tokens drawn from the opposite class's word list.
    pub noise: f64,
    /// Share of content tokens drawn from the class's own word list; the
    /// rest (none by default) come from a neutral list.
    pub signal: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub doc_emb_dim: usize,
    /// Standard deviation of the per-document noise added to document vectors.
    pub doc_emb_noise: f64,
}

impl Default for ReviewCorpusConfig {
    fn default() -> Self {
        Self {
            n_reviews: 1000,
            seed: 7,
            noise: 0.15,
            signal: 0.85,
            min_len: 8,
            max_len: 16,
            doc_emb_dim: 32,
            doc_emb_noise: 0.05,
        }
    }
}

pub struct SyntheticCorpus {
    pub dataset: Dataset,
    /// Stand-in for encoder output: mean of fixed random word vectors over a
    /// review's content words, plus Gaussian noise.
    pub doc_embeddings: DocEmbeddings,
}

fn word_vector(root: SeedRng, word: &str, dim: usize) -> Vec<f64> {
    let mut s = root.child(&format!("word-{word}")).stream();
    (0..dim).map(|_| StandardNormal.sample(&mut s)).collect()
}

pub fn review_corpus(cfg: &ReviewCorpusConfig) -> SyntheticCorpus {
    let root = SeedRng::new(cfg.seed);
    let mut rng = root.child("reviews").stream();
    let mut emb_rng = root.child("doc-emb-noise").stream();
    let noise = Normal::new(0.0, cfg.doc_emb_noise.max(0.0)).expect("finite std");
    let mut vec_cache: HashMap<&str, Vec<f64>> = HashMap::new();

    let mut reviews = Vec::with_capacity(cfg.n_reviews);
    let mut vectors = HashMap::with_capacity(cfg.n_reviews);
    for id in 0..cfg.n_reviews as u64 {
        let label = u8::from(rng.gen_bool(0.5));
        let (own, other): (&[&str], &[&str]) = if label == 1 {
            (&GENUINE_WORDS, &FAKE_WORDS)
        } else {
            (&FAKE_WORDS, &GENUINE_WORDS)
        };
        let len = rng.gen_range(cfg.min_len..=cfg.max_len);
        let mut content = Vec::with_capacity(len);
        let mut text = String::new();
        for i in 0..len {
            let u: f64 = rng.gen();
            let pool = if u < cfg.noise {
                other
            } else if u < cfg.noise + cfg.signal {
                own
            } else {
                &NEUTRAL_WORDS[..]
            };
            let w = *pool.choose(&mut rng).expect("non-empty word list");
            content.push(w);
            if rng.gen_bool(0.2) {
                text.push_str(FILLER.choose(&mut rng).unwrap());
                text.push(' ');
            }
            if i == 0 || rng.gen_bool(0.1) {
                let mut cs = w.chars();
                let first = cs.next().unwrap().to_ascii_uppercase();
                text.push(first);
                text.push_str(cs.as_str());
            } else {
                text.push_str(w);
            }
            if rng.gen_bool(0.1) {
                text.push_str([",", "!", "...", ";"].choose(&mut rng).unwrap());
            }
            text.push(' ');
        }
        text.push_str(if label == 0 && rng.gen_bool(0.3) { "!! \u{1F600}" } else { "." });
        let rating = if label == 0 {
            5.0
        } else {
            f64::from(rng.gen_range(1u8..=5))
        };

        let mut v = vec![0.0; cfg.doc_emb_dim];
        for w in &content {
            let wv = vec_cache
                .entry(w)
                .or_insert_with(|| word_vector(root, w, cfg.doc_emb_dim));
            v.iter_mut().zip(wv.iter()).for_each(|(a, b)| *a += b);
        }
        let n = content.len() as f64;
        v.iter_mut()
            .for_each(|a| *a = *a / n + noise.sample(&mut emb_rng));
        vectors.insert(id, v);

        reviews.push(RawReview {
            id,
            url: format!("https://shop.example/item/{}", rng.gen_range(1000..10000)),
            rating: Some(rating),
            text: text.trim_end().to_string(),
            collected_by: "synthetic".into(),
            label: Some(label),
        });
    }
    SyntheticCorpus {
        dataset: Dataset {
            reviews,
            source_files: Vec::new(),
        },
        doc_embeddings: DocEmbeddings::from_map(cfg.doc_emb_dim, vectors),
    }
}

/// Sentences whose tokens all come from one of two disjoint clusters:
/// `a0..` and `b0..`, `cluster_size` tokens each.
pub fn two_cluster_corpus(
    n_sentences: usize,
    cluster_size: usize,
    sentence_len: usize,
    seed: u64,
) -> (Vec<TokenDoc>, [Vec<String>; 2]) {
    let clusters = [
        (0..cluster_size).map(|i| format!("a{i}")).collect::<Vec<_>>(),
        (0..cluster_size).map(|i| format!("b{i}")).collect::<Vec<_>>(),
    ];
    let mut rng = SeedRng::new(seed).child("two-cluster").stream();
    let docs = (0..n_sentences)
        .map(|id| {
            let c = &clusters[id % 2];
            TokenDoc {
                id: id as u64,
                tokens: (0..sentence_len)
                    .map(|_| c.choose(&mut rng).unwrap().clone())
                    .collect(),
            }
        })
        .collect();
    (docs, clusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_lists_are_disjoint() {
        for w in GENUINE_WORDS {
            assert!(!FAKE_WORDS.contains(&w) && !NEUTRAL_WORDS.contains(&w), "{w}");
        }
        for w in FAKE_WORDS {
            assert!(!NEUTRAL_WORDS.contains(&w), "{w}");
        }
    }

    #[test]
    fn corpus_shape_and_determinism() {
        let cfg = ReviewCorpusConfig {
            n_reviews: 50,
            ..Default::default()
        };
        let a = review_corpus(&cfg);
        let b = review_corpus(&cfg);
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.dataset.len(), 50);
        assert_eq!(a.doc_embeddings.len(), 50);
        let ids = a.dataset.ids();
        assert_eq!(
            a.doc_embeddings.matrix_for(&ids).unwrap(),
            b.doc_embeddings.matrix_for(&ids).unwrap()
        );
        assert!(a.dataset.reviews.iter().all(|r| !r.text.is_empty() && r.label.is_some()));
    }

    #[test]
    fn clusters_do_not_mix() {
        let (docs, clusters) = two_cluster_corpus(10, 10, 6, 1);
        for d in &docs {
            let c = if clusters[0].contains(&d.tokens[0]) { 0 } else { 1 };
            assert!(d.tokens.iter().all(|t| clusters[c].contains(t)));
        }
    }
}
