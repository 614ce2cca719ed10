//! Brute-force k-nearest-neighbours under Euclidean distance.
//!
//! Equidistant neighbours are ordered by training-row index; a split class
//! vote goes to label 0.

use serde::{Deserialize, Serialize};

use super::{check_training, majority};
use crate::error::{Error, Result};
use crate::vectorize::FeatureMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub train: FeatureMatrix,
    pub labels: Vec<u8>,
    pub k: usize,
}

impl KnnModel {
    pub fn n_features(&self) -> usize {
        self.train.n_cols
    }

    /// Indices of the k nearest training rows, nearest first.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, r)| (sq_dist(r, x), i))
            .collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by_dist);
            d.truncate(self.k);
        }
        d.sort_by(by_dist);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, x: &[f64]) -> u8 {
        let nn = self.neighbors(x);
        let ones = nn.iter().filter(|&&i| self.labels[i] == 1).count();
        majority(ones, nn.len())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn fit_knn(x: &FeatureMatrix, y: &[u8], cfg: &KnnConfig) -> Result<KnnModel> {
    check_training(x, y)?;
    if cfg.k == 0 || cfg.k > x.n_rows {
        return Err(Error::BadK { k: cfg.k, n: x.n_rows });
    }
    Ok(KnnModel {
        train: x.clone(),
        labels: y.to_vec(),
        k: cfg.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_point() {
        let x = FeatureMatrix::dense(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let m = fit_knn(&x, &[0, 1], &KnnConfig { k: 1 }).unwrap();
        assert_eq!(m.predict_row(&[0.1, 0.0]), 0);
        assert_eq!(m.predict_row(&[0.9, 1.2]), 1);
    }

    #[test]
    fn class_tie_goes_to_zero() {
        let x = FeatureMatrix::dense(vec![vec![-1.0], vec![1.0]]);
        let m = fit_knn(&x, &[1, 0], &KnnConfig { k: 2 }).unwrap();
        assert_eq!(m.predict_row(&[0.0]), 0);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let x = FeatureMatrix::dense(vec![vec![1.0], vec![-1.0], vec![1.0]]);
        let m = fit_knn(&x, &[1, 0, 0], &KnnConfig { k: 1 }).unwrap();
        assert_eq!(m.neighbors(&[0.0]), vec![0]);
        assert_eq!(m.predict_row(&[0.0]), 1);
    }

    #[test]
    fn bad_k() {
        let x = FeatureMatrix::dense(vec![vec![0.0], vec![1.0]]);
        assert!(matches!(fit_knn(&x, &[0, 1], &KnnConfig { k: 3 }), Err(Error::BadK { .. })));
        assert!(matches!(fit_knn(&x, &[0, 1], &KnnConfig { k: 0 }), Err(Error::BadK { .. })));
    }
}
