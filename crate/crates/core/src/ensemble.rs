//! Hard-voting ensembles and evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::classifiers::{self, majority, Classifier, Hyperparams, ModelKind};
use crate::error::{Error, Result};
use crate::vectorize::FeatureMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VotingModel {
    pub name: String,
    pub members: Vec<Classifier>,
}

impl VotingModel {
    pub fn n_features(&self) -> usize {
        self.members[0].n_features()
    }

    pub fn member_votes(&self, x: &[f64]) -> Vec<u8> {
        self.members.iter().map(|m| m.predict_row(x)).collect()
    }

    pub fn predict_row(&self, x: &[f64]) -> u8 {
        vote(&self.member_votes(x))
    }
}

/// Majority label; an exact tie gives 0.
pub fn vote(predictions: &[u8]) -> u8 {
    let ones = predictions.iter().filter(|&&p| p == 1).count();
    majority(ones, predictions.len())
}

/// Fit each member independently on the same data, in the given order.
pub fn fit_voting(
    name: &str,
    members: &[ModelKind],
    x: &FeatureMatrix,
    y: &[u8],
    hp: &Hyperparams,
) -> Result<VotingModel> {
    if members.len() < 2 {
        return Err(Error::BadEnsemble(members.len()));
    }
    if let Some(k) = members.iter().find(|k| k.members().is_some()) {
        return Err(Error::Incompatible(format!(
            "ensemble member {} is itself an ensemble",
            k.name()
        )));
    }
    let members = members
        .iter()
        .map(|&k| classifiers::fit(k, x, y, hp))
        .collect::<Result<Vec<_>>>()?;
    Ok(VotingModel {
        name: name.to_string(),
        members,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when the metric's denominator was zero and 0.0 was reported.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// `confusion[true][pred]`
    pub confusion: [[usize; 2]; 2],
    pub per_class: [ClassMetrics; 2],
    pub n_test: usize,
    pub annihilated_docs: usize,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Metrics of `preds` against `labels`.
pub fn score(preds: &[u8], labels: &[u8], annihilated_docs: usize) -> Result<EvalReport> {
    if labels.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if preds.len() != labels.len() {
        return Err(Error::DimMismatch {
            expected: labels.len(),
            found: preds.len(),
        });
    }
    let mut confusion = [[0usize; 2]; 2];
    for (&p, &t) in preds.iter().zip(labels) {
        if t > 1 {
            return Err(Error::BadTrainingLabel(t));
        }
        confusion[t as usize][p as usize] += 1;
    }
    let n = labels.len();
    let per_class = [0, 1].map(|c| {
        let tp = confusion[c][c];
        let predicted = confusion[0][c] + confusion[1][c];
        let actual = confusion[c][0] + confusion[c][1];
        let (precision, precision_undefined) = ratio(tp, predicted);
        let (recall, recall_undefined) = ratio(tp, actual);
        let (f1, f1_undefined) = if precision + recall > 0.0 {
            (2.0 * precision * recall / (precision + recall), false)
        } else {
            (0.0, true)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            precision_undefined,
            recall_undefined,
            f1_undefined,
        }
    });
    Ok(EvalReport {
        accuracy: (confusion[0][0] + confusion[1][1]) as f64 / n as f64,
        confusion,
        per_class,
        n_test: n,
        annihilated_docs,
    })
}

pub fn evaluate(model: &Classifier, x: &FeatureMatrix, y: &[u8]) -> Result<EvalReport> {
    if x.n_rows == 0 {
        return Err(Error::EmptyTestSet);
    }
    let preds = model.predict(x)?;
    score(&preds, y, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vote_examples() {
        assert_eq!(vote(&[1, 1, 0]), 1);
        assert_eq!(vote(&[0, 0, 0]), 0);
        assert_eq!(vote(&[1, 0]), 0);
    }

    #[test]
    fn counting_example() {
        let r = score(&[1, 0, 1], &[1, 1, 1], 0).unwrap();
        assert_eq!(r.accuracy, 2.0 / 3.0);
        assert_eq!(r.confusion, [[0, 0], [1, 2]]);
        assert!(r.per_class[0].recall_undefined);
        assert_eq!(r.per_class[1].precision, 1.0);
    }

    #[test]
    fn never_predicted_class_has_flagged_precision() {
        let r = score(&[1, 1, 1], &[0, 1, 1], 0).unwrap();
        assert!(r.per_class[0].precision_undefined);
        assert_eq!(r.per_class[0].precision, 0.0);
        assert!(!r.per_class[1].precision_undefined);
    }

    #[test]
    fn perfect_predictions() {
        let r = score(&[0, 1, 1, 0], &[0, 1, 1, 0], 0).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion[0][1] + r.confusion[1][0], 0);
    }

    #[test]
    fn empty_test_set() {
        assert!(matches!(score(&[], &[], 0), Err(Error::EmptyTestSet)));
    }

    #[test]
    fn single_member_rejected() {
        let x = FeatureMatrix::dense(vec![vec![0.0], vec![1.0]]);
        let err = fit_voting("solo", &[ModelKind::Dt], &x, &[0, 1], &Hyperparams::default());
        assert!(matches!(err, Err(Error::BadEnsemble(1))));
    }
}
