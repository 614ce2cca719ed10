//! Versioned, checksummed model bundles.
//!
//! Layout: 8-byte magic, format version (u32 LE), payload length (u64 LE),
//! SHA-256 of the payload, then the payload as JSON. Floats are written
//! with round-trip precision, so a loaded bundle predicts bit-identically.

use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{self, Classifier};
use crate::data_io::{train_test_split, Dataset, RawReview, SplitSpec};
use crate::ensemble::{score, EvalReport};
use crate::error::{Error, Result};
use crate::experiment::{fit_featurizer, leakage_guard, prepare_split, RunConfig, Sources};
use crate::text::{Preprocessor, TokenDoc};
use crate::vectorize::{DocEmbeddings, Featurizer};

pub const MAGIC: &[u8; 8] = b"FAKEREV\0";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    /// SHA-256 over the training reviews' ids, texts and labels.
    pub corpus_fingerprint: String,
    pub split: SplitSpec,
    pub n_train: usize,
    pub train_accuracy: f64,
    /// Where the word or document vectors came from, if external.
    #[serde(default)]
    pub embedding_source: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub config: RunConfig,
    pub featurizer: Featurizer,
    pub model: Classifier,
    pub metadata: TrainingMetadata,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub id: u64,
    pub label: u8,
    /// The document had no token known to the representation and was
    /// classified from the zero vector.
    pub annihilated: bool,
    /// Member votes, in member order, for voting models.
    pub votes: Option<Vec<u8>>,
}

impl ModelBundle {
    pub fn preprocessor(&self) -> Result<Preprocessor> {
        Preprocessor::new(&self.config.pipeline)
    }

    pub fn member_names(&self) -> Vec<String> {
        match &self.model {
            Classifier::Voting(v) => v.members.iter().map(Classifier::name).collect(),
            _ => Vec::new(),
        }
    }

    pub fn predict_docs(&self, docs: &[TokenDoc], doc_emb: Option<&DocEmbeddings>) -> Result<Vec<Prediction>> {
        let x = self.featurizer.transform(docs, doc_emb)?;
        let labels = self.model.predict(&x)?;
        let annihilated = self.featurizer.annihilated(docs);
        Ok(docs
            .iter()
            .enumerate()
            .map(|(i, d)| Prediction {
                id: d.id,
                label: labels[i],
                annihilated: annihilated[i],
                votes: match &self.model {
                    Classifier::Voting(v) => Some(v.member_votes(x.row(i))),
                    _ => None,
                },
            })
            .collect())
    }

    pub fn predict_reviews(&self, reviews: &[RawReview], doc_emb: Option<&DocEmbeddings>) -> Result<Vec<Prediction>> {
        let docs = self.preprocessor()?.preprocess_all(reviews);
        self.predict_docs(&docs, doc_emb)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let payload = serde_json::to_vec(self)?;
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.format_version.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&Sha256::digest(&payload));
        out.extend_from_slice(&payload);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptBundle(m.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(corrupt("file is shorter than the bundle header"));
        }
        if &bytes[..8] != MAGIC {
            return Err(corrupt("not a model bundle (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
        let payload = &bytes[HEADER_LEN..];
        if payload.len() as u64 != len {
            return Err(corrupt(&format!(
                "payload is {} bytes, header says {len} (truncated?)",
                payload.len()
            )));
        }
        if Sha256::digest(payload).as_slice() != &bytes[20..52] {
            return Err(corrupt("checksum mismatch"));
        }
        let bundle: ModelBundle =
            serde_json::from_slice(payload).map_err(|e| corrupt(&format!("payload does not parse: {e}")))?;
        if bundle.format_version != version {
            return Err(corrupt("payload version differs from header version"));
        }
        Ok(bundle)
    }
}

pub fn save_model(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, bundle.to_bytes()?).map_err(|e| Error::path(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::path(path, e))?;
    ModelBundle::from_bytes(&bytes)
}

/// Fit the configured representation and model on the training side of
/// the configured split of `ds`.
pub fn train_bundle(ds: &Dataset, sources: &Sources, cfg: &RunConfig, created_unix: u64) -> Result<ModelBundle> {
    let (train_raw, _) = train_test_split(ds, &cfg.split())?;
    let split = prepare_split(ds, cfg)?;
    let featurizer = fit_featurizer(cfg.representation, &split.train, sources, cfg)?;
    leakage_guard(&featurizer, &split.train, sources, cfg)?;
    let x = featurizer.transform(&split.train, sources.doc_emb.as_ref())?;
    let model = classifiers::fit(cfg.model, &x, &split.y_train, &cfg.hyperparams)?;
    let train_accuracy = score(&model.predict(&x)?, &split.y_train, 0)?.accuracy;
    Ok(ModelBundle {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        featurizer,
        model,
        metadata: TrainingMetadata {
            seed: cfg.seed,
            created_unix,
            corpus_fingerprint: corpus_fingerprint(&train_raw.reviews),
            split: cfg.split(),
            n_train: split.train.len(),
            train_accuracy,
            embedding_source: None,
        },
    })
}

/// Which labeled rows `evaluate_bundle` scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalScope {
    /// The held-out side of the bundle's own split.
    Test,
    /// Every labeled row.
    All,
}

pub fn evaluate_bundle(
    bundle: &ModelBundle,
    ds: &Dataset,
    doc_emb: Option<&DocEmbeddings>,
    scope: EvalScope,
) -> Result<EvalReport> {
    let rows = match scope {
        EvalScope::Test => {
            let (train, test) = train_test_split(ds, &bundle.metadata.split)?;
            if corpus_fingerprint(&train.reviews) != bundle.metadata.corpus_fingerprint {
                warn!("training side of this dataset differs from the one the model was trained on");
            }
            test.reviews
        }
        EvalScope::All => ds.reviews.iter().filter(|r| r.label.is_some()).cloned().collect(),
    };
    let labels: Vec<u8> = rows.iter().filter_map(|r| r.label).collect();
    if labels.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let preds = bundle.predict_reviews(&rows, doc_emb)?;
    let annihilated = preds.iter().filter(|p| p.annihilated).count();
    let labels_pred: Vec<u8> = preds.iter().map(|p| p.label).collect();
    score(&labels_pred, &labels, annihilated)
}

/// Hex SHA-256 over `(id, text, label)` of each review, in order.
pub fn corpus_fingerprint(reviews: &[RawReview]) -> String {
    let mut h = Sha256::new();
    for r in reviews {
        h.update(r.id.to_le_bytes());
        h.update((r.text.len() as u64).to_le_bytes());
        h.update(r.text.as_bytes());
        h.update([r.label.unwrap_or(u8::MAX)]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{LogRegModel, ModelKind};
    use crate::text::TokenDoc;

    fn tiny() -> ModelBundle {
        let docs = vec![
            TokenDoc { id: 0, tokens: vec!["good".into()] },
            TokenDoc { id: 1, tokens: vec!["bad".into()] },
        ];
        ModelBundle {
            format_version: FORMAT_VERSION,
            config: RunConfig {
                model: ModelKind::Lr,
                ..Default::default()
            },
            featurizer: Featurizer::fit_tfidf(&docs, 1).unwrap(),
            model: Classifier::LogReg(LogRegModel {
                weights: vec![-0.1 / 3.0, 0.7],
                bias: 1e-17,
            }),
            metadata: TrainingMetadata {
                seed: 9,
                created_unix: 0,
                corpus_fingerprint: String::new(),
                split: SplitSpec::default(),
                n_train: 2,
                train_accuracy: 1.0,
                embedding_source: None,
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let b = tiny();
        assert_eq!(ModelBundle::from_bytes(&b.to_bytes().unwrap()).unwrap(), b);
    }

    #[test]
    fn truncation_detected() {
        let bytes = tiny().to_bytes().unwrap();
        for cut in [0, 10, HEADER_LEN, bytes.len() - 1] {
            assert!(matches!(ModelBundle::from_bytes(&bytes[..cut]), Err(Error::CorruptBundle(_))));
        }
    }

    #[test]
    fn flipped_byte_detected() {
        let mut bytes = tiny().to_bytes().unwrap();
        let last = bytes.len() - 2;
        bytes[last] ^= 1;
        assert!(matches!(ModelBundle::from_bytes(&bytes), Err(Error::CorruptBundle(_))));
    }

    #[test]
    fn newer_version_rejected() {
        let mut b = tiny();
        b.format_version = FORMAT_VERSION + 1;
        let err = ModelBundle::from_bytes(&b.to_bytes().unwrap()).unwrap_err();
        assert!(matches!(err, Error::VersionMismatch { found: 2, expected: 1 }));
        let msg = err.to_string();
        assert!(msg.contains('2') && msg.contains('1'));
    }

    #[test]
    fn fingerprint_depends_on_text() {
        let r = |t: &str| RawReview {
            id: 0,
            url: String::new(),
            rating: None,
            text: t.into(),
            collected_by: String::new(),
            label: Some(1),
        };
        assert_ne!(corpus_fingerprint(&[r("a")]), corpus_fingerprint(&[r("b")]));
        assert_eq!(corpus_fingerprint(&[r("a")]).len(), 64);
    }
}
