//! Skip-gram word embeddings trained with negative sampling.
//!
//! Plain SGD on one thread: the same corpus and config always give the same
//! table, bit for bit. The vocabulary is sorted lexicographically, input
//! vectors start uniform in `[-0.5/dim, 0.5/dim]` and output vectors at zero.
//! The learning rate decays linearly from `learning_rate` to `min_learning_rate`
//! over all epochs.

use std::collections::BTreeMap;
use std::io::Write;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{sigmoid, softplus};
use crate::error::{Error, Result};
use crate::rng::{SeedRng, DEFAULT_SEED};
use crate::text::TokenDoc;
use crate::vectorize::EmbeddingTable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
    pub unigram_power: f64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            min_count: 1,
            seed: DEFAULT_SEED,
            unigram_power: 0.75,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadConfig(format!("sgns: {m}")));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.min_learning_rate >= 0.0 && self.min_learning_rate <= self.learning_rate) {
            return bad("min_learning_rate must lie in [0, learning_rate]");
        }
        if !self.unigram_power.is_finite() {
            return bad("unigram_power must be finite");
        }
        Ok(())
    }
}

/// Cumulative sampling distribution proportional to `count^power`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnigramTable {
    cdf: Vec<f64>,
}

impl UnigramTable {
    pub fn new(counts: &[u64], power: f64) -> Self {
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { (c as f64).powf(power) })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self { cdf }
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.cdf[i] - if i == 0 { 0.0 } else { self.cdf[i - 1] }
    }

    /// Inverse-CDF lookup: the first index whose cumulative mass exceeds `u`.
    pub fn lookup(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// `k` draws from the table, redrawing any index in `excluded`. Returns
/// fewer than `k` only when every index with mass is excluded.
pub fn negative_sample<R: Rng>(table: &UnigramTable, rng: &mut R, k: usize, excluded: &[usize]) -> Vec<usize> {
    let available: f64 = (0..table.len())
        .filter(|i| !excluded.contains(i))
        .map(|i| table.probability(i))
        .sum();
    if available <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let t = table.lookup(rng.gen::<f64>());
        if !excluded.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// (center, context) index pairs with a dynamic window: each position draws
/// its own radius uniformly from `1..=window`.
pub fn build_training_pairs<R: Rng>(docs: &[Vec<usize>], window: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for doc in docs {
        for (i, &center) in doc.iter().enumerate() {
            let b = rng.gen_range(1..=window);
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(doc.len().saturating_sub(1));
            for (j, &ctx) in doc.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i {
                    pairs.push((center, ctx));
                }
            }
        }
    }
    pairs
}

/// Gradients of one pair's loss with respect to every vector it touches.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGrad {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-ln σ(u_c·v) - Σ ln σ(-u_n·v)` and its gradient.
pub fn sgns_pair_loss_and_grad(v: &[f64], u_c: &[f64], u_negs: &[&[f64]]) -> PairGrad {
    let s = dot(u_c, v);
    let mut loss = softplus(-s);
    let gpos = sigmoid(s) - 1.0;
    let mut center: Vec<f64> = u_c.iter().map(|u| gpos * u).collect();
    let context = v.iter().map(|x| gpos * x).collect();
    let mut negatives = Vec::with_capacity(u_negs.len());
    for u in u_negs {
        let s = dot(u, v);
        loss += softplus(s);
        let g = sigmoid(s);
        center.iter_mut().zip(u.iter()).for_each(|(c, ui)| *c += g * ui);
        negatives.push(v.iter().map(|x| g * x).collect());
    }
    PairGrad {
        loss,
        center,
        context,
        negatives,
    }
}

/// Trainable parameters: row-major `|V| × dim` input and output matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct SgnsState {
    pub dim: usize,
    pub vocab: Vec<String>,
    pub counts: Vec<u64>,
    pub input_vectors: Vec<f64>,
    pub output_vectors: Vec<f64>,
    pub unigram_table: UnigramTable,
}

impl SgnsState {
    pub fn new(vocab: Vec<String>, counts: Vec<u64>, cfg: &SgnsConfig) -> Self {
        let dim = cfg.dim;
        let bound = 0.5 / dim as f64;
        let mut rng = SeedRng::new(cfg.seed).child("sgns-init").stream();
        let input_vectors = (0..vocab.len() * dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        let unigram_table = UnigramTable::new(&counts, cfg.unigram_power);
        Self {
            dim,
            output_vectors: vec![0.0; vocab.len() * dim],
            vocab,
            counts,
            input_vectors,
            unigram_table,
        }
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.input_vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output(&self, i: usize) -> &[f64] {
        &self.output_vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn table(&self) -> EmbeddingTable {
        EmbeddingTable {
            dim: self.dim,
            vectors: self
                .vocab
                .iter()
                .enumerate()
                .map(|(i, t)| (t.clone(), self.input(i).to_vec()))
                .collect(),
        }
    }
}

/// One SGD step on a (center, context) pair. All gradients are taken at the
/// pre-step parameters. Returns the pair loss before the update.
pub fn sgns_step(state: &mut SgnsState, center: usize, context: usize, negatives: &[usize], lr: f64) -> f64 {
    let dim = state.dim;
    let g = {
        let negs: Vec<&[f64]> = negatives.iter().map(|&n| state.output(n)).collect();
        sgns_pair_loss_and_grad(state.input(center), state.output(context), &negs)
    };
    let apply = |m: &mut Vec<f64>, i: usize, grad: &[f64]| {
        m[i * dim..(i + 1) * dim]
            .iter_mut()
            .zip(grad)
            .for_each(|(p, g)| *p -= lr * g);
    };
    apply(&mut state.input_vectors, center, &g.center);
    apply(&mut state.output_vectors, context, &g.context);
    for (&n, gn) in negatives.iter().zip(&g.negatives) {
        apply(&mut state.output_vectors, n, gn);
    }
    g.loss
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsRun {
    pub table: EmbeddingTable,
    pub log: Vec<EpochLog>,
}

pub fn write_training_log<W: Write>(log: &[EpochLog], mut out: W) -> Result<()> {
    for e in log {
        serde_json::to_writer(&mut out, e)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Vocabulary (lexicographic) and counts of tokens seen at least `min_count` times.
pub fn sgns_vocabulary(docs: &[TokenDoc], min_count: usize) -> (Vec<String>, Vec<u64>) {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for d in docs {
        for t in &d.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count as u64)
        .map(|(t, c)| (t.to_string(), c))
        .unzip()
}

pub fn train_sgns(docs: &[TokenDoc], cfg: &SgnsConfig) -> Result<SgnsRun> {
    cfg.validate()?;
    let (vocab, counts) = sgns_vocabulary(docs, cfg.min_count);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let encoded: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let mut state = SgnsState::new(vocab.clone(), counts, cfg);
    if cfg.epochs == 0 {
        warn!("sgns: epochs = 0, returning the initial table");
        return Ok(SgnsRun {
            table: state.table(),
            log: Vec::new(),
        });
    }
    if vocab.len() < 2 {
        warn!("sgns: vocabulary has a single token, no negatives can be drawn");
    }

    let root = SeedRng::new(cfg.seed);
    let mut pair_rng = root.child("sgns-pairs").stream();
    let mut neg_rng = root.child("sgns-negatives").stream();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut pairs = build_training_pairs(&encoded, cfg.window, &mut pair_rng);
        pairs.shuffle(&mut pair_rng);
        let mut total = 0.0;
        for (k, &(center, context)) in pairs.iter().enumerate() {
            let progress = (epoch as f64 + k as f64 / pairs.len() as f64) / cfg.epochs as f64;
            let lr = cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * progress;
            let negs = negative_sample(&state.unigram_table, &mut neg_rng, cfg.negatives, &[context]);
            total += sgns_step(&mut state, center, context, &negs, lr);
        }
        let mean_loss = if pairs.is_empty() { 0.0 } else { total / pairs.len() as f64 };
        info!("sgns epoch {}: mean loss {mean_loss:.6} over {} pairs", epoch + 1, pairs.len());
        log.push(EpochLog {
            epoch: epoch + 1,
            mean_loss,
            pairs: pairs.len(),
        });
    }
    Ok(SgnsRun {
        table: state.table(),
        log,
    })
}
