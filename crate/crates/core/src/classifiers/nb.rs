//! Naive Bayes: multinomial for count-like features, Gaussian for dense ones.
//!
//! Posteriors are computed in log space; the evidence term is never formed
//! because normalizing the two joint probabilities cancels it.

use serde::{Deserialize, Serialize};

use super::{check_training, is_sparse_representation};
use crate::error::{Error, Result};
use crate::vectorize::FeatureMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbVariant {
    Multinomial,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbConfig {
    /// `None` picks by representation: counts/tfidf → multinomial, dense → Gaussian.
    pub variant: Option<NbVariant>,
    pub laplace: f64,
    pub var_floor: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        Self {
            variant: None,
            laplace: 1.0,
            var_floor: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum NbParams {
    Multinomial {
        /// ln P(term | class), one vector per class.
        feature_log_prob: [Vec<f64>; 2],
    },
    Gaussian {
        mean: [Vec<f64>; 2],
        var: [Vec<f64>; 2],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub priors: [f64; 2],
    pub params: NbParams,
}

impl NbModel {
    pub fn variant(&self) -> NbVariant {
        match self.params {
            NbParams::Multinomial { .. } => NbVariant::Multinomial,
            NbParams::Gaussian { .. } => NbVariant::Gaussian,
        }
    }

    pub fn n_features(&self) -> usize {
        match &self.params {
            NbParams::Multinomial { feature_log_prob } => feature_log_prob[0].len(),
            NbParams::Gaussian { mean, .. } => mean[0].len(),
        }
    }

    fn log_joint(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let lp = self.priors[c].ln();
            *slot = if lp == f64::NEG_INFINITY {
                lp
            } else {
                lp + match &self.params {
                    NbParams::Multinomial { feature_log_prob } => x
                        .iter()
                        .zip(&feature_log_prob[c])
                        .filter(|(xi, _)| **xi != 0.0)
                        .map(|(xi, l)| xi * l)
                        .sum::<f64>(),
                    NbParams::Gaussian { mean, var } => x
                        .iter()
                        .zip(mean[c].iter().zip(&var[c]))
                        .map(|(xi, (m, v))| {
                            -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (xi - m) * (xi - m) / v)
                        })
                        .sum::<f64>(),
                }
            };
        }
        out
    }

    pub fn predict_row(&self, x: &[f64]) -> u8 {
        let (_, p1) = nb_posterior(self, x);
        u8::from(p1 >= 0.5)
    }
}

/// `(P(0|x), P(1|x))`
pub fn nb_posterior(model: &NbModel, x: &[f64]) -> (f64, f64) {
    let [l0, l1] = model.log_joint(x);
    let m = l0.max(l1);
    if m == f64::NEG_INFINITY {
        return (0.5, 0.5);
    }
    let (e0, e1) = ((l0 - m).exp(), (l1 - m).exp());
    let z = e0 + e1;
    (e0 / z, e1 / z)
}

pub fn fit_nb(x: &FeatureMatrix, y: &[u8], cfg: &NbConfig) -> Result<NbModel> {
    check_training(x, y)?;
    let variant = cfg.variant.unwrap_or(if is_sparse_representation(x.representation) {
        NbVariant::Multinomial
    } else {
        NbVariant::Gaussian
    });
    let n = x.n_rows as f64;
    let d = x.n_cols;
    let class_n = [
        y.iter().filter(|&&l| l == 0).count(),
        y.iter().filter(|&&l| l == 1).count(),
    ];
    let priors = [class_n[0] as f64 / n, class_n[1] as f64 / n];

    let params = match variant {
        NbVariant::Multinomial => {
            let mut totals = [vec![0.0; d], vec![0.0; d]];
            for (i, (row, &c)) in x.rows().zip(y).enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if v < 0.0 {
                        return Err(Error::NegativeFeatureForMultinomial { row: i, col: j });
                    }
                    totals[c as usize][j] += v;
                }
            }
            let feature_log_prob = totals.map(|t| {
                let denom = t.iter().sum::<f64>() + cfg.laplace * d as f64;
                t.iter().map(|v| ((v + cfg.laplace) / denom).ln()).collect()
            });
            NbParams::Multinomial { feature_log_prob }
        }
        NbVariant::Gaussian => {
            let mut mean = [vec![0.0; d], vec![0.0; d]];
            let mut var = [vec![0.0; d], vec![0.0; d]];
            for (row, &c) in x.rows().zip(y) {
                mean[c as usize].iter_mut().zip(row).for_each(|(m, v)| *m += v);
            }
            for c in 0..2 {
                let k = class_n[c].max(1) as f64;
                mean[c].iter_mut().for_each(|m| *m /= k);
            }
            for (row, &c) in x.rows().zip(y) {
                let c = c as usize;
                for ((s, v), m) in var[c].iter_mut().zip(row).zip(&mean[c]) {
                    *s += (v - m) * (v - m);
                }
            }
            for c in 0..2 {
                let k = class_n[c].max(1) as f64;
                var[c].iter_mut().for_each(|s| *s = (*s / k).max(cfg.var_floor));
            }
            NbParams::Gaussian { mean, var }
        }
    };
    Ok(NbModel { priors, params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::Representation;

    fn counts(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let n = rows.len();
        let d = rows[0].len();
        FeatureMatrix::from_rows(rows, d, Representation::Counts, (0..n as u64).collect()).unwrap()
    }

    #[test]
    fn priors_by_counting() {
        let x = FeatureMatrix::dense(vec![vec![0.0], vec![1.0], vec![2.0]]);
        let m = fit_nb(&x, &[0, 0, 1], &NbConfig::default()).unwrap();
        assert_eq!(m.priors, [2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(m.variant(), NbVariant::Gaussian);
    }

    #[test]
    fn multinomial_term_probabilities() {
        // class 0: term t 3 of 4 tokens; class 1: 1 of 4
        let x = counts(vec![vec![3.0, 1.0], vec![1.0, 3.0]]);
        let m = fit_nb(&x, &[0, 1], &NbConfig::default()).unwrap();
        let NbParams::Multinomial { feature_log_prob } = &m.params else { panic!() };
        assert!((feature_log_prob[0][0].exp() - 2.0 / 3.0).abs() < 1e-12);
        assert!((feature_log_prob[1][0].exp() - 1.0 / 3.0).abs() < 1e-12);
        for row in feature_log_prob {
            let s: f64 = row.iter().map(|l| l.exp()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_variance_floor() {
        let x = FeatureMatrix::dense(vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 5.0]]);
        let m = fit_nb(&x, &[0, 0, 1], &NbConfig::default()).unwrap();
        let NbParams::Gaussian { var, .. } = &m.params else { panic!() };
        assert_eq!(var[0][0], 1e-9);
        let (p0, p1) = nb_posterior(&m, &[1.0, 0.5]);
        assert!(p0.is_finite() && p1.is_finite());
    }

    #[test]
    fn negative_counts_rejected() {
        let x = counts(vec![vec![1.0, -1.0], vec![0.0, 1.0]]);
        assert!(matches!(
            fit_nb(&x, &[0, 1], &NbConfig::default()),
            Err(Error::NegativeFeatureForMultinomial { row: 0, col: 1 })
        ));
    }

    #[test]
    fn mirror_data_midpoint_is_even() {
        let x = FeatureMatrix::dense(vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]);
        let m = fit_nb(&x, &[0, 0, 1, 1], &NbConfig::default()).unwrap();
        let (p0, p1) = nb_posterior(&m, &[0.0]);
        assert!((p0 - 0.5).abs() < 1e-9 && (p1 - 0.5).abs() < 1e-9);
    }
}
