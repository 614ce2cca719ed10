//! Run configuration, train-only featurizer fitting, the leakage guard and
//! the representation × model benchmark grid.

use std::collections::BTreeSet;
use std::io::Write;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, Classifier, Hyperparams, ModelKind};
use crate::data_io::{train_test_split, Dataset, SplitSpec};
use crate::embedding::{train_sgns, SgnsConfig};
use crate::ensemble::{score, EvalReport, VotingModel};
use crate::error::{Error, Result};
use crate::rng::DEFAULT_SEED;
use crate::text::{PipelineConfig, Preprocessor, TokenDoc};
use crate::vectorize::{
    average_embed, build_vocabulary, DocEmbeddings, EmbeddingTable, FeatureMatrix, Featurizer,
    Representation, RepresentationKind, Scaler,
};

/// Everything that determines a training run. JSON config files may give
/// any subset of fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub representation: RepresentationKind,
    pub model: ModelKind,
    pub seed: u64,
    pub test_fraction: f64,
    pub stratify: bool,
    pub min_df: usize,
    pub pipeline: PipelineConfig,
    pub hyperparams: Hyperparams,
    pub sgns: SgnsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            representation: RepresentationKind::Tfidf,
            model: ModelKind::VoteDsk,
            seed: DEFAULT_SEED,
            test_fraction: 0.2,
            stratify: false,
            min_df: 1,
            pipeline: PipelineConfig::default(),
            hyperparams: Hyperparams::default(),
            sgns: SgnsConfig::default(),
        }
    }
}

impl RunConfig {
    /// Use `seed` for the split, every model and embedding training.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.hyperparams.seed = seed;
        self.sgns.seed = seed;
        self
    }

    pub fn split(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            seed: self.seed,
            stratify: self.stratify,
        }
    }
}

/// Externally supplied vectors. Missing word vectors are trained in-repo.
#[derive(Clone, Debug, Default)]
pub struct Sources {
    pub word_emb: Option<EmbeddingTable>,
    pub doc_emb: Option<DocEmbeddings>,
}

/// Fit a featurizer on training documents only.
pub fn fit_featurizer(
    kind: RepresentationKind,
    train: &[TokenDoc],
    sources: &Sources,
    cfg: &RunConfig,
) -> Result<Featurizer> {
    match kind {
        RepresentationKind::Tfidf => Featurizer::fit_tfidf(train, cfg.min_df),
        RepresentationKind::Word2vec => {
            let table = match &sources.word_emb {
                Some(t) => t.clone(),
                None => {
                    info!("training word2vec on {} training documents", train.len());
                    train_sgns(train, &cfg.sgns)?.table
                }
            };
            Ok(Featurizer::fit_word2vec(train, table))
        }
        RepresentationKind::DocEmb => {
            let src = sources.doc_emb.as_ref().ok_or_else(|| {
                Error::Incompatible("the doc-emb representation needs document vectors (--doc-emb)".into())
            })?;
            let ids: Vec<u64> = train.iter().map(|d| d.id).collect();
            Featurizer::fit_doc_emb(&ids, src)
        }
    }
}

/// Check that every statistic held by `featurizer` is what the training
/// documents alone produce. A mismatch means test data leaked into fitting.
pub fn leakage_guard(featurizer: &Featurizer, train: &[TokenDoc], sources: &Sources, cfg: &RunConfig) -> Result<()> {
    let leak = |what: &str| Err(Error::Invariant(format!("{what} was not fitted on the training split alone")));
    match featurizer {
        Featurizer::Tfidf { vocab } => {
            if *vocab != build_vocabulary(train, cfg.min_df)? {
                return leak("tf-idf vocabulary/idf");
            }
        }
        Featurizer::Word2vec { table, scaler } => {
            if sources.word_emb.is_none() {
                let seen: BTreeSet<&str> = train.iter().flat_map(|d| d.tokens.iter().map(String::as_str)).collect();
                if table.vectors.keys().any(|t| !seen.contains(t.as_str())) {
                    return leak("word2vec vocabulary");
                }
                // training is deterministic, so a rerun must reproduce the table exactly
                if *table != train_sgns(train, &cfg.sgns)?.table {
                    return leak("word2vec table");
                }
            }
            let rows: Vec<Vec<f64>> = train.iter().map(|d| average_embed(d, table)).collect();
            let raw = FeatureMatrix::from_rows(rows, table.dim, Representation::Dense, train.iter().map(|d| d.id).collect())?;
            if *scaler != Scaler::fit(&raw) {
                return leak("word2vec scaler");
            }
        }
        Featurizer::DocEmb { scaler, .. } => {
            let src = sources
                .doc_emb
                .as_ref()
                .ok_or_else(|| Error::Incompatible("document vectors missing".into()))?;
            let ids: Vec<u64> = train.iter().map(|d| d.id).collect();
            if *scaler != Scaler::fit(&src.matrix_for(&ids)?) {
                return leak("document-embedding scaler");
            }
        }
    }
    Ok(())
}

/// Preprocessed sides of one holdout split.
pub struct PreparedSplit {
    pub train: Vec<TokenDoc>,
    pub test: Vec<TokenDoc>,
    pub y_train: Vec<u8>,
    pub y_test: Vec<u8>,
}

pub fn prepare_split(ds: &Dataset, cfg: &RunConfig) -> Result<PreparedSplit> {
    let pre = Preprocessor::new(&cfg.pipeline)?;
    let (train, test) = train_test_split(ds, &cfg.split())?;
    let labels = |d: &Dataset| d.labels().ok_or_else(|| Error::Invariant("split returned unlabeled rows".into()));
    Ok(PreparedSplit {
        y_train: labels(&train)?,
        y_test: labels(&test)?,
        train: pre.preprocess_all(&train.reviews),
        test: pre.preprocess_all(&test.reviews),
    })
}

/// Model columns in the order of the published results table.
pub const GRID_MODELS: [ModelKind; 8] = [
    ModelKind::Rf,
    ModelKind::Dt,
    ModelKind::Lr,
    ModelKind::VoteRdl,
    ModelKind::Svm,
    ModelKind::Nb,
    ModelKind::Knn,
    ModelKind::VoteDsk,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub representation: RepresentationKind,
    pub model: ModelKind,
    pub report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub split: SplitSpec,
    pub n_train: usize,
    pub n_test: usize,
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn cell(&self, repr: RepresentationKind, model: ModelKind) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.representation == repr && c.model == model)
    }

    pub fn accuracy(&self, repr: RepresentationKind, model: ModelKind) -> Option<f64> {
        self.cell(repr, model).map(|c| c.report.accuracy)
    }

    /// One row per representation, one column per model.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["representation".to_string()];
        header.extend(GRID_MODELS.iter().map(|m| m.name().to_string()));
        w.write_record(&header)?;
        for repr in RepresentationKind::ALL {
            let mut row = vec![repr.name().to_string()];
            for m in GRID_MODELS {
                let acc = self
                    .accuracy(repr, m)
                    .ok_or_else(|| Error::Invariant(format!("grid cell {}/{} missing", repr.name(), m.name())))?;
                row.push(format!("{acc:.6}"));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Fit every model of `models` on one representation. Ensemble members are
/// shared with the single-model fits; each is fitted independently on the
/// same data, so this equals fitting the ensemble from scratch.
pub fn fit_models(
    models: &[ModelKind],
    x: &FeatureMatrix,
    y: &[u8],
    hp: &Hyperparams,
) -> Result<Vec<(ModelKind, Classifier)>> {
    let mut singles: Vec<(ModelKind, Classifier)> = Vec::new();
    let get = |k: ModelKind, singles: &mut Vec<(ModelKind, Classifier)>| -> Result<Classifier> {
        if let Some((_, c)) = singles.iter().find(|(s, _)| *s == k) {
            return Ok(c.clone());
        }
        let c = classifiers::fit(k, x, y, hp)?;
        singles.push((k, c.clone()));
        Ok(c)
    };
    let mut out = Vec::with_capacity(models.len());
    for &k in models {
        let c = match k.members() {
            Some(members) => Classifier::Voting(VotingModel {
                name: k.name().to_string(),
                members: members
                    .iter()
                    .map(|&m| get(m, &mut singles))
                    .collect::<Result<_>>()?,
            }),
            None => get(k, &mut singles)?,
        };
        out.push((k, c));
    }
    Ok(out)
}

/// All 3 × 8 cells on one shared split, each representation fitted on the
/// training side only.
pub fn benchmark_grid(ds: &Dataset, sources: &Sources, cfg: &RunConfig) -> Result<GridReport> {
    let split = prepare_split(ds, cfg)?;
    info!("benchmark split: {} train, {} test", split.train.len(), split.test.len());
    let mut cells = Vec::with_capacity(24);
    for repr in RepresentationKind::ALL {
        let feat = fit_featurizer(repr, &split.train, sources, cfg)?;
        leakage_guard(&feat, &split.train, sources, cfg)?;
        let x_train = feat.transform(&split.train, sources.doc_emb.as_ref())?;
        let x_test = feat.transform(&split.test, sources.doc_emb.as_ref())?;
        let annihilated = feat.annihilated(&split.test).iter().filter(|a| **a).count();
        if annihilated > 0 {
            warn!("{}: {annihilated} test documents have no known token", repr.name());
        }
        for (model, clf) in fit_models(&GRID_MODELS, &x_train, &split.y_train, &cfg.hyperparams)? {
            let preds = clf.predict(&x_test)?;
            let report = score(&preds, &split.y_test, annihilated)?;
            info!("{} / {}: accuracy {:.4}", repr.name(), model.name(), report.accuracy);
            cells.push(GridCell {
                representation: repr,
                model,
                report,
            });
        }
    }
    Ok(GridReport {
        split: cfg.split(),
        n_train: split.train.len(),
        n_test: split.test.len(),
        cells,
    })
}
