//! Binary classifiers over [`FeatureMatrix`] rows, labels in {0, 1}.
//!
//! Tie convention: score-based models (logistic regression, SVM, naive
//! Bayes) predict 1 when the score sits exactly on the boundary
//! (σ = 0.5, f(x) = 0, P(1|x) = 0.5). Vote-based models (KNN, forest,
//! voting ensembles) resolve exact ties to 0.

pub mod forest;
pub mod knn;
pub mod logreg;
pub mod nb;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::ensemble::VotingModel;
use crate::error::{Error, Result};
use crate::rng::{SeedRng, DEFAULT_SEED};
use crate::vectorize::{FeatureMatrix, Representation};

pub use forest::{fit_forest, ForestConfig, ForestModel};
pub use knn::{fit_knn, KnnConfig, KnnModel};
pub use logreg::{fit_logreg, LogRegConfig, LogRegModel};
pub use nb::{fit_nb, nb_posterior, NbConfig, NbModel, NbVariant};
pub use svm::{fit_svm_smo, kernel_eval, Kernel, KernelSpec, SvmConfig, SvmModel};
pub use tree::{fit_tree, gini, TreeConfig, TreeModel};

/// `1 / (1 + e^-z)`, evaluated without overflow for any finite z.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)`, stable for large |z|.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Classic majority vote over binary labels; ties go to 0.
pub fn majority(ones: usize, total: usize) -> u8 {
    u8::from(2 * ones > total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Dt,
    Rf,
    Lr,
    Knn,
    Svm,
    Nb,
    /// Decision tree + SVM + KNN.
    VoteDsk,
    /// Random forest + decision tree + logistic regression.
    VoteRdl,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        Self::Dt,
        Self::Rf,
        Self::Lr,
        Self::Knn,
        Self::Svm,
        Self::Nb,
        Self::VoteDsk,
        Self::VoteRdl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dt => "dt",
            Self::Rf => "rf",
            Self::Lr => "lr",
            Self::Knn => "knn",
            Self::Svm => "svm",
            Self::Nb => "nb",
            Self::VoteDsk => "vote-dsk",
            Self::VoteRdl => "vote-rdl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "model",
                name: s.to_string(),
            })
    }

    pub fn members(self) -> Option<&'static [ModelKind]> {
        match self {
            Self::VoteDsk => Some(&[Self::Dt, Self::Svm, Self::Knn]),
            Self::VoteRdl => Some(&[Self::Rf, Self::Dt, Self::Lr]),
            _ => None,
        }
    }
}

/// Hyperparameters for every model family. Missing JSON fields keep their
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub seed: u64,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
    pub logreg: LogRegConfig,
    pub knn: KnnConfig,
    pub svm: SvmConfig,
    pub nb: NbConfig,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            tree: TreeConfig::default(),
            forest: ForestConfig::default(),
            logreg: LogRegConfig::default(),
            knn: KnnConfig::default(),
            svm: SvmConfig::default(),
            nb: NbConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Classifier {
    Tree(TreeModel),
    Forest(ForestModel),
    LogReg(LogRegModel),
    Knn(KnnModel),
    Svm(SvmModel),
    Nb(NbModel),
    Voting(VotingModel),
}

impl Classifier {
    pub fn n_features(&self) -> usize {
        match self {
            Self::Tree(m) => m.n_features,
            Self::Forest(m) => m.n_features,
            Self::LogReg(m) => m.weights.len(),
            Self::Knn(m) => m.n_features(),
            Self::Svm(m) => m.n_features,
            Self::Nb(m) => m.n_features(),
            Self::Voting(m) => m.n_features(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Tree(_) => "dt".into(),
            Self::Forest(_) => "rf".into(),
            Self::LogReg(_) => "lr".into(),
            Self::Knn(_) => "knn".into(),
            Self::Svm(_) => "svm".into(),
            Self::Nb(_) => "nb".into(),
            Self::Voting(m) => m.name.clone(),
        }
    }

    /// Label for one row; the caller guarantees the row width.
    pub fn predict_row(&self, x: &[f64]) -> u8 {
        match self {
            Self::Tree(m) => m.predict_row(x),
            Self::Forest(m) => m.predict_row(x),
            Self::LogReg(m) => m.predict_row(x),
            Self::Knn(m) => m.predict_row(x),
            Self::Svm(m) => m.predict_row(x),
            Self::Nb(m) => m.predict_row(x),
            Self::Voting(m) => m.predict_row(x),
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        check_dim(self.n_features(), x)?;
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }
}

pub(crate) fn check_dim(expected: usize, x: &FeatureMatrix) -> Result<()> {
    if x.n_cols != expected {
        return Err(Error::DimMismatch {
            expected,
            found: x.n_cols,
        });
    }
    Ok(())
}

/// Shared training-input checks: non-empty, aligned, finite, binary labels.
pub(crate) fn check_training(x: &FeatureMatrix, y: &[u8]) -> Result<()> {
    if x.n_rows == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if y.len() != x.n_rows {
        return Err(Error::DimMismatch {
            expected: x.n_rows,
            found: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::BadTrainingLabel(bad));
    }
    x.check_finite()
}

/// Fit a single model family (or one of the two named ensembles).
pub fn fit(kind: ModelKind, x: &FeatureMatrix, y: &[u8], hp: &Hyperparams) -> Result<Classifier> {
    let rng = SeedRng::new(hp.seed);
    Ok(match kind {
        ModelKind::Dt => Classifier::Tree(fit_tree(x, y, &hp.tree, rng)?),
        ModelKind::Rf => Classifier::Forest(fit_forest(x, y, &hp.forest, rng)?),
        ModelKind::Lr => Classifier::LogReg(fit_logreg(x, y, &hp.logreg)?),
        ModelKind::Knn => Classifier::Knn(fit_knn(x, y, &hp.knn)?),
        ModelKind::Svm => Classifier::Svm(fit_svm_smo(x, y, &hp.svm, rng)?),
        ModelKind::Nb => Classifier::Nb(fit_nb(x, y, &hp.nb)?),
        ModelKind::VoteDsk | ModelKind::VoteRdl => Classifier::Voting(crate::ensemble::fit_voting(
            kind.name(),
            kind.members().expect("ensemble kinds have members"),
            x,
            y,
            hp,
        )?),
    })
}

pub(crate) fn is_sparse_representation(r: Representation) -> bool {
    matches!(r, Representation::Counts | Representation::Tfidf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_fixed_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(710.0), 1.0);
        assert_eq!(sigmoid(-710.0), (-710.0f64).exp() / (1.0 + (-710.0f64).exp()));
        assert!(sigmoid(-1000.0) >= 0.0);
    }

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for z in [-30.0, -1.0, 0.0, 0.5, 20.0] {
            assert!((softplus(z) - (1.0 + f64::exp(z)).ln()).abs() < 1e-12);
        }
        assert_eq!(softplus(1000.0), 1000.0);
    }

    #[test]
    fn majority_ties_to_zero() {
        assert_eq!(majority(1, 2), 0);
        assert_eq!(majority(2, 3), 1);
        assert_eq!(majority(0, 3), 0);
    }

    #[test]
    fn model_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(ModelKind::parse(k.name()).unwrap(), k);
        }
        assert!(ModelKind::parse("xgboost").is_err());
    }

    proptest! {
        #[test]
        fn sigmoid_is_symmetric(z in -1000.0f64..1000.0) {
            prop_assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() <= 1e-15);
        }
    }
}
