use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on, TreeConfig, TreeModel};
use super::{check_training, majority};
use crate::error::Result;
use crate::rng::SeedRng;
use crate::vectorize::FeatureMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Candidate features per split; `None` means `floor(sqrt(d))`.
    pub max_features: Option<usize>,
    /// When false every tree sees each training row exactly once.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 5,
            max_features: None,
            bootstrap: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub per_tree_seeds: Vec<u64>,
    pub features_per_split: usize,
    pub n_features: usize,
}

impl ForestModel {
    pub fn predict_row(&self, x: &[f64]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.predict_row(x) == 1).count();
        majority(ones, self.trees.len())
    }
}

/// Seed of tree `i`; the tree uses it for split-feature sampling and a
/// `bootstrap` child of it for row sampling.
pub fn tree_seed(forest: SeedRng, i: usize) -> SeedRng {
    forest.child(&format!("tree-{i}"))
}

pub fn fit_forest(x: &FeatureMatrix, y: &[u8], cfg: &ForestConfig, rng: SeedRng) -> Result<ForestModel> {
    check_training(x, y)?;
    let n = x.n_rows;
    let k = cfg
        .max_features
        .unwrap_or_else(|| (x.n_cols as f64).sqrt().floor() as usize)
        .clamp(1, x.n_cols.max(1));
    let tree_cfg = TreeConfig {
        max_depth: cfg.max_depth,
        max_features: Some(k),
    };
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut seeds = Vec::with_capacity(cfg.n_trees);
    for i in 0..cfg.n_trees {
        let seed = tree_seed(rng, i);
        let rows: Vec<usize> = if cfg.bootstrap {
            let mut s = seed.child("bootstrap").stream();
            (0..n).map(|_| s.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(fit_tree_on(x, y, &rows, &tree_cfg, seed));
        seeds.push(seed.seed());
    }
    Ok(ForestModel {
        trees,
        per_tree_seeds: seeds,
        features_per_split: k,
        n_features: x.n_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::tree::{fit_tree, Node};

    fn data() -> (FeatureMatrix, Vec<u8>) {
        let mut s = SeedRng::new(3).stream();
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..4).map(|_| s.gen_range(-1.0..1.0)).collect())
            .collect();
        let y = rows.iter().map(|r| u8::from(r[0] + 0.5 * r[2] > 0.1)).collect();
        (FeatureMatrix::dense(rows), y)
    }

    #[test]
    fn single_tree_without_sampling_matches_plain_tree() {
        let (x, y) = data();
        let cfg = ForestConfig {
            n_trees: 1,
            max_features: Some(4),
            bootstrap: false,
            ..Default::default()
        };
        let forest = fit_forest(&x, &y, &cfg, SeedRng::new(9)).unwrap();
        let tree = fit_tree(&x, &y, &TreeConfig::default(), tree_seed(SeedRng::new(9), 0)).unwrap();
        assert_eq!(forest.trees[0], tree);
        for r in x.rows() {
            assert_eq!(forest.predict_row(r), tree.predict_row(r));
        }
    }

    #[test]
    fn majority_of_trees_decides() {
        let leaf = |label| TreeModel {
            root: Node::Leaf { label, counts: [1, 1] },
            max_depth: 5,
            n_features: 1,
        };
        let f = ForestModel {
            trees: vec![leaf(1), leaf(1), leaf(0)],
            per_tree_seeds: vec![0; 3],
            features_per_split: 1,
            n_features: 1,
        };
        assert_eq!(f.predict_row(&[0.0]), 1);
        let even = ForestModel { trees: vec![leaf(1), leaf(0)], ..f };
        assert_eq!(even.predict_row(&[0.0]), 0);
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = data();
        let cfg = ForestConfig { n_trees: 10, ..Default::default() };
        let a = fit_forest(&x, &y, &cfg, SeedRng::new(9)).unwrap();
        let b = fit_forest(&x, &y, &cfg, SeedRng::new(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.features_per_split, 2);
        assert!(a.trees.iter().all(|t| t.depth() <= 5));
    }
}
