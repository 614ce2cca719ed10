//! CART decision tree with Gini impurity.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::check_training;
use crate::error::Result;
use crate::rng::SeedRng;
use crate::vectorize::FeatureMatrix;

/// Minimum impurity decrease for a split to be accepted.
const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    /// Candidate features examined per split; `None` means all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 5,
            max_features: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: u8,
        counts: [usize; 2],
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn leaf(counts: [usize; 2]) -> Self {
        Node::Leaf {
            label: u8::from(counts[1] > counts[0]),
            counts,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: Node,
    pub max_depth: usize,
    pub n_features: usize,
}

impl TreeModel {
    pub fn predict_row(&self, x: &[f64]) -> u8 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label, .. } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

/// `1 - Σ p_c²` over the two classes.
pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

pub fn fit_tree(x: &FeatureMatrix, y: &[u8], cfg: &TreeConfig, rng: SeedRng) -> Result<TreeModel> {
    check_training(x, y)?;
    let rows: Vec<usize> = (0..x.n_rows).collect();
    Ok(fit_tree_on(x, y, &rows, cfg, rng))
}

/// Grow a tree on a multiset of row indices (bootstrap samples repeat rows).
pub(crate) fn fit_tree_on(
    x: &FeatureMatrix,
    y: &[u8],
    rows: &[usize],
    cfg: &TreeConfig,
    rng: SeedRng,
) -> TreeModel {
    let mut grower = Grower {
        x,
        y,
        cfg,
        rng: rng.stream(),
        features: (0..x.n_cols).collect(),
    };
    let mut rows = rows.to_vec();
    TreeModel {
        root: grower.grow(&mut rows, 0),
        max_depth: cfg.max_depth,
        n_features: x.n_cols,
    }
}

struct Grower<'a> {
    x: &'a FeatureMatrix,
    y: &'a [u8],
    cfg: &'a TreeConfig,
    rng: rand_chacha::ChaCha8Rng,
    features: Vec<usize>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> [usize; 2] {
        let ones = rows.iter().filter(|&&r| self.y[r] == 1).count();
        [rows.len() - ones, ones]
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> Node {
        let counts = self.counts(rows);
        if depth >= self.cfg.max_depth || counts[0] == 0 || counts[1] == 0 {
            return Node::leaf(counts);
        }
        let Some(best) = self.best_split(rows, counts) else {
            return Node::leaf(counts);
        };
        if gini(counts) - best.impurity <= MIN_GAIN {
            return Node::leaf(counts);
        }
        let (feature, threshold) = (best.feature, best.threshold);
        let mut mid = 0;
        for i in 0..rows.len() {
            if self.x.get(rows[i], feature) <= threshold {
                rows.swap(i, mid);
                mid += 1;
            }
        }
        let (l, r) = rows.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        Node::Split {
            feature,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Lowest weighted child impurity over the candidate features. Candidates
    /// are visited in a seeded random order; the first strictly best split wins.
    fn best_split(&mut self, rows: &[usize], total: [usize; 2]) -> Option<BestSplit> {
        self.features.shuffle(&mut self.rng);
        let k = self
            .cfg
            .max_features
            .unwrap_or(self.x.n_cols)
            .clamp(1, self.x.n_cols.max(1));
        let n = rows.len() as f64;
        let mut best: Option<BestSplit> = None;
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
        for &f in &self.features[..k.min(self.features.len())] {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.x.get(r, f), self.y[r])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0usize; 2];
            for i in 0..sorted.len() - 1 {
                left[sorted[i].1 as usize] += 1;
                let (a, b) = (sorted[i].0, sorted[i + 1].0);
                if a == b {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let nl = (i + 1) as f64;
                let impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
                if best.as_ref().is_none_or(|bs| impurity < bs.impurity) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_fixtures() {
        assert_eq!(gini([2, 2]), 0.5);
        assert_eq!(gini([5, 0]), 0.0);
        assert_eq!(gini([0, 3]), 0.0);
    }

    #[test]
    fn leaf_ties_go_to_zero() {
        assert!(matches!(Node::leaf([2, 2]), Node::Leaf { label: 0, .. }));
    }

    #[test]
    fn one_split_separates_threshold_data() {
        let x = FeatureMatrix::dense(vec![
            vec![-2.0, 0.3],
            vec![-1.0, 0.9],
            vec![1.0, 0.1],
            vec![2.0, 0.8],
        ]);
        let y = [0, 0, 1, 1];
        let t = fit_tree(&x, &y, &TreeConfig::default(), SeedRng::new(9)).unwrap();
        assert_eq!(t.depth(), 1);
        match &t.root {
            Node::Split { feature, threshold, .. } => assert_eq!((*feature, *threshold), (0, 0.0)),
            n => panic!("{n:?}"),
        }
    }

    #[test]
    fn pure_input_is_a_leaf() {
        let x = FeatureMatrix::dense(vec![vec![1.0], vec![2.0]]);
        let t = fit_tree(&x, &[1, 1], &TreeConfig::default(), SeedRng::new(9)).unwrap();
        assert_eq!(t.root, Node::Leaf { label: 1, counts: [0, 2] });
    }

    #[test]
    fn identical_rows_cannot_split() {
        let x = FeatureMatrix::dense(vec![vec![1.0], vec![1.0], vec![1.0]]);
        let t = fit_tree(&x, &[0, 1, 1], &TreeConfig::default(), SeedRng::new(9)).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict_row(&[1.0]), 1);
    }

    #[test]
    fn depth_zero_is_majority_leaf() {
        let x = FeatureMatrix::dense(vec![vec![0.0], vec![1.0], vec![2.0]]);
        let cfg = TreeConfig { max_depth: 0, ..Default::default() };
        let t = fit_tree(&x, &[0, 1, 1], &cfg, SeedRng::new(9)).unwrap();
        assert_eq!(t.root, Node::Leaf { label: 1, counts: [1, 2] });
    }
}
