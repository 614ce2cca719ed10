//! Soft-margin kernel SVM solved by sequential minimal optimization.
//!
//! The dual is
//!
//! ```text
//! min  ½ αᵀQα − Σα   s.t.  0 ≤ α_i ≤ C,  Σ α_i y_i = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each iteration picks the maximal-violating pair (first index by largest
//! KKT violation, second by the largest second-order decrease) and solves
//! the two-variable subproblem in closed form. Candidates are scanned in a
//! seeded random order, so ties between equally good candidates depend only
//! on the seed. The solver stops when the largest violation gap falls below
//! `tol`, which leaves every training point within `tol` of its KKT
//! condition under the returned intercept.

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::check_training;
use crate::error::{Error, Result};
use crate::rng::SeedRng;
use crate::vectorize::FeatureMatrix;

const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

/// Kernel as configured, before `gamma = "scale"` is resolved against data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// `gamma: None` means `1 / (d · mean per-feature variance)`.
    Rbf { gamma: Option<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: KernelSpec,
    pub tol: f64,
    /// Iteration cap; `None` means `max(10_000_000, 100 n)`.
    pub max_iter: Option<usize>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            kernel: KernelSpec::Rbf { gamma: None },
            tol: 1e-3,
            max_iter: None,
        }
    }
}

pub fn kernel_eval(kernel: &Kernel, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(kernel_unchecked(kernel, a, b))
}

fn kernel_unchecked(kernel: &Kernel, a: &[f64], b: &[f64]) -> f64 {
    match *kernel {
        Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Kernel::Rbf { gamma } => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-gamma * d2).exp()
        }
    }
}

/// `1 / (d · mean per-feature variance)`, or 1 when the data has no spread.
pub fn scale_gamma(x: &FeatureMatrix) -> f64 {
    let d = x.n_cols;
    let n = x.n_rows as f64;
    if d == 0 || x.n_rows == 0 {
        return 1.0;
    }
    let mut total_var = 0.0;
    for j in 0..d {
        let mean = (0..x.n_rows).map(|i| x.get(i, j)).sum::<f64>() / n;
        total_var += (0..x.n_rows).map(|i| (x.get(i, j) - mean).powi(2)).sum::<f64>() / n;
    }
    let mean_var = total_var / d as f64;
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    pub alpha: Vec<f64>,
    /// ±1 labels of the support vectors.
    pub y: Vec<f64>,
    pub b: f64,
    pub kernel: Kernel,
    pub c: f64,
    pub n_features: usize,
    pub converged: bool,
}

impl SvmModel {
    /// `Σ α_i y_i K(x_i, x) + b`
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(self.alpha.iter().zip(&self.y))
            .map(|(sv, (a, y))| a * y * kernel_unchecked(&self.kernel, sv, x))
            .sum::<f64>()
            + self.b
    }

    /// sign(f(x)) with sign(0) taken as +1.
    pub fn predict_row(&self, x: &[f64]) -> u8 {
        u8::from(self.decision(x) >= 0.0)
    }

    /// Dual coefficients for every training row (zero for non-support rows).
    pub fn dense_alpha(&self, n_train: usize) -> Vec<f64> {
        let mut a = vec![0.0; n_train];
        for (&i, &v) in self.support_indices.iter().zip(&self.alpha) {
            a[i] = v;
        }
        a
    }
}

pub fn fit_svm_smo(x: &FeatureMatrix, y: &[u8], cfg: &SvmConfig, rng: SeedRng) -> Result<SvmModel> {
    check_training(x, y)?;
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::SingleClassTraining);
    }
    let kernel = match cfg.kernel {
        KernelSpec::Linear => Kernel::Linear,
        KernelSpec::Rbf { gamma: Some(g) } => Kernel::Rbf { gamma: g },
        KernelSpec::Rbf { gamma: None } => Kernel::Rbf { gamma: scale_gamma(x) },
    };
    let n = x.n_rows;
    let c = cfg.c;
    let ys: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = kernel_unchecked(&kernel, x.row(i), x.row(j));
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    let k = |i: usize, j: usize| gram[i * n + j];

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng.child("smo-order").stream());

    let mut alpha = vec![0.0; n];
    // gradient of the dual objective: G = Qα − 1
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let max_iter = cfg.max_iter.unwrap_or_else(|| (100 * n).max(10_000_000));
    let mut converged = false;
    for _ in 0..max_iter {
        // i: largest -y G over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for &t in &order {
            if in_up(alpha[t], ys[t]) {
                let v = -ys[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // j: best second-order decrease over I_low
        let mut gmin = f64::INFINITY;
        let mut best_obj = f64::INFINITY;
        let mut j_sel = None;
        for &t in &order {
            if !in_low(alpha[t], ys[t]) {
                continue;
            }
            let v = -ys[t] * grad[t];
            gmin = gmin.min(v);
            if let Some(i) = i_sel {
                let diff = gmax - v;
                if diff > 0.0 {
                    let quad = (k(i, i) + k(t, t) - 2.0 * k(i, t)).max(TAU);
                    let obj = -(diff * diff) / quad;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        if gmax - gmin < cfg.tol {
            converged = true;
            break;
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(TAU);
        if ys[i] != ys[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += ys[t] * (ys[i] * k(i, t) * di + ys[j] * k(j, t) * dj);
        }
    }
    if !converged {
        warn!("SMO stopped at the iteration cap before reaching tol = {}", cfg.tol);
    }

    let b = intercept(&alpha, &ys, &grad, c);
    let support_indices: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        support_vectors: support_indices.iter().map(|&t| x.row(t).to_vec()).collect(),
        alpha: support_indices.iter().map(|&t| alpha[t]).collect(),
        y: support_indices.iter().map(|&t| ys[t]).collect(),
        support_indices,
        b,
        kernel,
        c,
        n_features: x.n_cols,
        converged,
    })
}

/// Mean of `y_t − Σ_s α_s y_s K_ts` over free vectors, or the midpoint of
/// the feasible interval when every α sits at a bound.
fn intercept(alpha: &[f64], ys: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut n_free = 0usize;
    for t in 0..alpha.len() {
        let r = -ys[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            sum += r;
            n_free += 1;
        } else {
            let at_upper = alpha[t] >= c;
            // (y=+1, α=0) and (y=−1, α=C) need r ≤ b; the other bounded
            // cases need r ≥ b
            if (ys[t] > 0.0) != at_upper {
                lb = lb.max(r);
            } else {
                ub = ub.min(r);
            }
        }
    }
    if n_free > 0 {
        sum / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else {
        lb
    }
}
