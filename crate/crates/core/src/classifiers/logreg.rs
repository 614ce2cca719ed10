//! Logistic regression trained by full-batch gradient descent.
//!
//! Objective: mean cross-entropy plus `l2/2 * ||w||²` (bias unpenalized).
//! Parameters start at zero, so the model has no stochastic component. A
//! step that would raise the loss is rejected and the learning rate halved,
//! which makes the loss sequence non-increasing.

use serde::{Deserialize, Serialize};

use super::{check_training, sigmoid, softplus};
use crate::error::Result;
use crate::vectorize::FeatureMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub max_iter: usize,
    pub lr: f64,
    pub l2: f64,
    /// Stop once the gradient's largest component falls below this.
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            lr: 0.1,
            l2: 1e-4,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogRegModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn predict_row(&self, x: &[f64]) -> u8 {
        u8::from(self.probability(x) >= 0.5)
    }
}

/// Per-iteration record of a fit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitTrace {
    /// Loss after each accepted step, starting with the initial loss.
    pub losses: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_lr: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Regularized loss and its gradient with respect to `(w, b)`.
pub fn loss_and_grad(w: &[f64], b: f64, x: &FeatureMatrix, y: &[u8], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = x.n_rows as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (row, &label) in x.rows().zip(y) {
        let z = dot(w, row) + b;
        let t = f64::from(label);
        // -[t ln σ(z) + (1-t) ln(1-σ(z))] = softplus(z) - t z
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        gw.iter_mut().zip(row).for_each(|(g, xi)| *g += r * xi);
        gb += r;
    }
    loss /= n;
    gb /= n;
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
    }
    loss += 0.5 * l2 * dot(w, w);
    (loss, gw, gb)
}

pub fn loss(w: &[f64], b: f64, x: &FeatureMatrix, y: &[u8], l2: f64) -> f64 {
    loss_and_grad(w, b, x, y, l2).0
}

pub fn fit_logreg(x: &FeatureMatrix, y: &[u8], cfg: &LogRegConfig) -> Result<LogRegModel> {
    fit_logreg_traced(x, y, cfg).map(|(m, _)| m)
}

pub fn fit_logreg_traced(x: &FeatureMatrix, y: &[u8], cfg: &LogRegConfig) -> Result<(LogRegModel, FitTrace)> {
    check_training(x, y)?;
    let mut w = vec![0.0; x.n_cols];
    let mut b = 0.0;
    let mut lr = cfg.lr;
    let (mut cur, mut gw, mut gb) = loss_and_grad(&w, b, x, y, cfg.l2);
    let mut trace = FitTrace {
        losses: vec![cur],
        ..Default::default()
    };
    while trace.iterations < cfg.max_iter {
        let gnorm = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gnorm < cfg.tol {
            trace.converged = true;
            break;
        }
        trace.iterations += 1;
        let w_new: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - lr * g).collect();
        let b_new = b - lr * gb;
        let (next, ngw, ngb) = loss_and_grad(&w_new, b_new, x, y, cfg.l2);
        if next > cur {
            lr /= 2.0;
            if lr < 1e-12 {
                break;
            }
            continue;
        }
        w = w_new;
        b = b_new;
        cur = next;
        gw = ngw;
        gb = ngb;
        trace.losses.push(cur);
    }
    trace.final_lr = lr;
    Ok((LogRegModel { weights: w, bias: b }, trace))
}
