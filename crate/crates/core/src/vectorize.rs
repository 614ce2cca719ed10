//! Feature extraction: bag-of-words counts and TF-IDF, averaged word
//! embeddings, and externally computed per-review embeddings.
//!
//! Matrices are stored dense and row-major. Vocabulary columns are sorted
//! lexicographically so the same corpus always yields the same bytes.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TokenDoc;

/// Standard deviations below this are treated as this value.
pub const STD_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Counts,
    Tfidf,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub representation: Representation,
    data: Vec<f64>,
    pub row_ids: Vec<u64>,
}

impl FeatureMatrix {
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        n_cols: usize,
        representation: Representation,
        row_ids: Vec<u64>,
    ) -> Result<Self> {
        assert_eq!(rows.len(), row_ids.len(), "one id per row");
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in &rows {
            if r.len() != n_cols {
                return Err(Error::DimMismatch {
                    expected: n_cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            representation,
            data,
            row_ids,
        })
    }

    /// Dense matrix with ids `0..n`; convenient for tests and synthetic data.
    pub fn dense(rows: Vec<Vec<f64>>) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let ids = (0..rows.len() as u64).collect();
        Self::from_rows(rows, n_cols, Representation::Dense, ids).expect("ragged rows")
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics; a zero-width matrix still has rows
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            n_rows: idx.len(),
            n_cols: self.n_cols,
            representation: self.representation,
            data,
            row_ids: idx.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFiniteFeature {
                row: p / self.n_cols.max(1),
                col: p % self.n_cols.max(1),
            }),
            None => Ok(()),
        }
    }

    /// Audit export: header `id f0 .. f{D-1}`, tab separated.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("id".to_string())
            .chain((0..self.n_cols).map(|j| format!("f{j}")))
            .collect();
        writeln!(out, "{}", header.join("\t"))?;
        for (i, row) in self.rows().enumerate() {
            write!(out, "{}", self.row_ids[i])?;
            for v in row {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            terms: r.terms,
            index,
            doc_freq: r.doc_freq,
            n_docs: r.n_docs,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            terms: v.terms,
            doc_freq: v.doc_freq,
            n_docs: v.n_docs,
        }
    }
}

impl Vocabulary {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<usize> {
        self.index_of(term).map(|i| self.doc_freq[i])
    }

    /// Smoothed inverse document frequency per column.
    pub fn idf(&self) -> Vec<f64> {
        self.doc_freq.iter().map(|&df| idf(self.n_docs, df)).collect()
    }
}

/// `ln((1 + N) / (1 + df)) + 1`
pub fn idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

pub fn build_vocabulary(docs: &[TokenDoc], min_df: usize) -> Result<Vocabulary> {
    let min_df = min_df.max(1);
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        let mut seen: Vec<&str> = d.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, doc_freq): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|(_, c)| *c >= min_df)
        .map(|(t, c)| (t.to_string(), c))
        .unzip();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(VocabularyRepr {
        terms,
        doc_freq,
        n_docs: docs.len(),
    }
    .into())
}

pub fn count_vectorize(docs: &[TokenDoc], vocab: &Vocabulary) -> FeatureMatrix {
    let n_cols = vocab.len();
    let mut data = vec![0.0; docs.len() * n_cols];
    for (i, d) in docs.iter().enumerate() {
        for t in &d.tokens {
            if let Some(j) = vocab.index_of(t) {
                data[i * n_cols + j] += 1.0;
            }
        }
    }
    FeatureMatrix {
        n_rows: docs.len(),
        n_cols,
        representation: Representation::Counts,
        data,
        row_ids: docs.iter().map(|d| d.id).collect(),
    }
}

/// Raw-count tf times smoothed idf, then L2 normalization of each nonzero row.
pub fn tfidf_transform(counts: &FeatureMatrix, vocab: &Vocabulary) -> Result<FeatureMatrix> {
    if counts.n_cols != vocab.len() {
        return Err(Error::DimMismatch {
            expected: vocab.len(),
            found: counts.n_cols,
        });
    }
    let idf = vocab.idf();
    let mut out = counts.clone();
    out.representation = Representation::Tfidf;
    for row in out.data.chunks_mut(out.n_cols.max(1)) {
        for (v, w) in row.iter_mut().zip(&idf) {
            *v *= w;
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// word2vec text format: `V D` header, then `token v1 .. vD` per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.vectors.len(), self.dim)?;
        for (tok, v) in &self.vectors {
            write!(out, "{tok}")?;
            for x in v {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn load_word_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::path(path, e))?;
    read_word_embeddings(f, &path.display().to_string())
}

pub fn read_word_embeddings<R: Read>(reader: R, origin: &str) -> Result<EmbeddingTable> {
    let mut lines = BufReader::new(reader).lines();
    let bad_header = |reason: &str| Error::BadHeader {
        path: origin.to_string(),
        reason: reason.to_string(),
    };
    let header = lines.next().ok_or_else(|| bad_header("file is empty"))??;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| bad_header("expected `<vocab size> <dim>`"))?;
    let [n_words, dim] = nums[..] else {
        return Err(bad_header("expected `<vocab size> <dim>`"));
    };
    if dim == 0 {
        return Err(bad_header("dimension must be positive"));
    }
    let mut vectors = BTreeMap::new();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().unwrap_or_default().to_string();
        let values: Vec<&str> = parts.collect();
        if values.len() != dim {
            return Err(Error::DimMismatchAt {
                path: origin.to_string(),
                line: lineno,
                expected: dim,
                found: values.len(),
            });
        }
        let v = parse_finite(&values, origin, lineno)?;
        rows += 1;
        if vectors.insert(token.clone(), v).is_some() {
            warn!("{origin}: line {lineno}: duplicate token `{token}`, last occurrence kept");
        }
    }
    if rows != n_words {
        warn!("{origin}: header declares {n_words} vectors, file has {rows}");
    }
    Ok(EmbeddingTable { dim, vectors })
}

fn parse_finite(values: &[&str], origin: &str, line: usize) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::NonFiniteValue {
                path: origin.to_string(),
                line,
            }),
        })
        .collect()
}

/// Unweighted mean of the in-vocabulary token vectors; zeros if there are none.
pub fn average_embed(doc: &TokenDoc, table: &EmbeddingTable) -> Vec<f64> {
    let mut acc = vec![0.0; table.dim];
    let mut n = 0usize;
    for v in doc.tokens.iter().filter_map(|t| table.get(t)) {
        acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
        n += 1;
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

/// Per-review vectors produced outside this crate, keyed by review id.
#[derive(Clone, Debug, PartialEq)]
pub struct DocEmbeddings {
    pub dim: usize,
    vectors: HashMap<u64, Vec<f64>>,
}

impl DocEmbeddings {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::path(path, e))?;
        Self::read(f, &path.display().to_string())
    }

    /// TSV with header `id v1 .. vD`.
    pub fn read<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines.next().ok_or_else(|| Error::BadHeader {
            path: origin.to_string(),
            reason: "file is empty".into(),
        })??;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.first().map(|c| c.trim()) != Some("id") || cols.len() < 2 {
            return Err(Error::BadHeader {
                path: origin.to_string(),
                reason: "expected `id<TAB>v1<TAB>...<TAB>vD`".into(),
            });
        }
        let dim = cols.len() - 1;
        let mut vectors = HashMap::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != dim + 1 {
                return Err(Error::DimMismatchAt {
                    path: origin.to_string(),
                    line: lineno,
                    expected: dim,
                    found: fields.len().saturating_sub(1),
                });
            }
            let id: u64 = fields[0].trim().parse().map_err(|_| Error::BadHeader {
                path: origin.to_string(),
                reason: format!("line {lineno}: id `{}` is not an integer", fields[0]),
            })?;
            let v = parse_finite(&fields[1..], origin, lineno)?;
            if vectors.insert(id, v).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn from_map(dim: usize, vectors: HashMap<u64, Vec<f64>>) -> Self {
        Self { dim, vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Rows aligned to `ids`.
    pub fn matrix_for(&self, ids: &[u64]) -> Result<FeatureMatrix> {
        let rows = ids
            .iter()
            .map(|id| self.vectors.get(id).cloned().ok_or(Error::MissingId(*id)))
            .collect::<Result<Vec<_>>>()?;
        FeatureMatrix::from_rows(rows, self.dim, Representation::Dense, ids.to_vec())
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("id".to_string())
            .chain((1..=self.dim).map(|j| format!("v{j}")))
            .collect();
        writeln!(out, "{}", header.join("\t"))?;
        let mut ids: Vec<_> = self.vectors.keys().copied().collect();
        ids.sort_unstable();
        for id in ids {
            write!(out, "{id}")?;
            for v in &self.vectors[&id] {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn load_doc_embeddings(path: impl AsRef<Path>, expected_ids: &[u64]) -> Result<FeatureMatrix> {
    DocEmbeddings::load(path)?.matrix_for(expected_ids)
}

/// Column means and population standard deviations of a training matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(m: &FeatureMatrix) -> Self {
        let n = m.n_rows.max(1) as f64;
        let mut mean = vec![0.0; m.n_cols];
        for row in m.rows() {
            mean.iter_mut().zip(row).for_each(|(a, x)| *a += x);
        }
        mean.iter_mut().for_each(|a| *a /= n);
        let mut var = vec![0.0; m.n_cols];
        for row in m.rows() {
            for ((v, x), mu) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - mu) * (x - mu);
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
        Self { mean, std }
    }

    pub fn transform(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.n_cols != self.mean.len() {
            return Err(Error::DimMismatch {
                expected: self.mean.len(),
                found: m.n_cols,
            });
        }
        let mut out = m.clone();
        for row in out.data.chunks_mut(out.n_cols.max(1)) {
            for ((x, mu), sd) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *x = (*x - mu) / sd;
            }
        }
        Ok(out)
    }
}

pub fn standardize(m: &FeatureMatrix) -> (FeatureMatrix, Scaler) {
    let scaler = Scaler::fit(m);
    let out = scaler.transform(m).expect("scaler fitted on this matrix");
    (out, scaler)
}

/// Which text representation a [`Featurizer`] produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationKind {
    Tfidf,
    Word2vec,
    DocEmb,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 3] = [Self::Tfidf, Self::Word2vec, Self::DocEmb];

    pub fn name(self) -> &'static str {
        match self {
            Self::Tfidf => "tfidf",
            Self::Word2vec => "word2vec",
            Self::DocEmb => "doc-emb",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "representation",
                name: s.to_string(),
            })
    }
}

/// A representation fitted on training documents only, re-applied unchanged
/// to any later documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Featurizer {
    Tfidf {
        vocab: Vocabulary,
    },
    Word2vec {
        table: EmbeddingTable,
        scaler: Scaler,
    },
    DocEmb {
        dim: usize,
        scaler: Scaler,
        /// How the external encoder pooled token states, if known. Metadata only.
        #[serde(default)]
        pooling: Option<String>,
    },
}

impl Featurizer {
    pub fn kind(&self) -> RepresentationKind {
        match self {
            Self::Tfidf { .. } => RepresentationKind::Tfidf,
            Self::Word2vec { .. } => RepresentationKind::Word2vec,
            Self::DocEmb { .. } => RepresentationKind::DocEmb,
        }
    }

    pub fn fit_tfidf(train: &[TokenDoc], min_df: usize) -> Result<Self> {
        Ok(Self::Tfidf {
            vocab: build_vocabulary(train, min_df)?,
        })
    }

    pub fn fit_word2vec(train: &[TokenDoc], table: EmbeddingTable) -> Self {
        let raw = average_matrix(train, &table);
        Self::Word2vec {
            scaler: Scaler::fit(&raw),
            table,
        }
    }

    pub fn fit_doc_emb(train_ids: &[u64], source: &DocEmbeddings) -> Result<Self> {
        let raw = source.matrix_for(train_ids)?;
        Ok(Self::DocEmb {
            dim: source.dim,
            scaler: Scaler::fit(&raw),
            pooling: None,
        })
    }

    /// `doc_emb` is required for the document-embedding representation and
    /// ignored otherwise.
    pub fn transform(
        &self,
        docs: &[TokenDoc],
        doc_emb: Option<&DocEmbeddings>,
    ) -> Result<FeatureMatrix> {
        match self {
            Self::Tfidf { vocab } => tfidf_transform(&count_vectorize(docs, vocab), vocab),
            Self::Word2vec { table, scaler } => scaler.transform(&average_matrix(docs, table)),
            Self::DocEmb { dim, scaler, .. } => {
                let src = doc_emb.ok_or_else(|| {
                    Error::Incompatible("document-embedding representation needs a vector file".into())
                })?;
                if src.dim != *dim {
                    return Err(Error::DimMismatch {
                        expected: *dim,
                        found: src.dim,
                    });
                }
                let ids: Vec<u64> = docs.iter().map(|d| d.id).collect();
                scaler.transform(&src.matrix_for(&ids)?)
            }
        }
    }

    /// Documents left with no usable token under this representation.
    pub fn annihilated(&self, docs: &[TokenDoc]) -> Vec<bool> {
        match self {
            Self::Tfidf { vocab } => docs
                .iter()
                .map(|d| d.tokens.iter().all(|t| vocab.index_of(t).is_none()))
                .collect(),
            Self::Word2vec { table, .. } => docs
                .iter()
                .map(|d| d.tokens.iter().all(|t| table.get(t).is_none()))
                .collect(),
            Self::DocEmb { .. } => vec![false; docs.len()],
        }
    }
}

fn average_matrix(docs: &[TokenDoc], table: &EmbeddingTable) -> FeatureMatrix {
    let rows = docs.iter().map(|d| average_embed(d, table)).collect();
    FeatureMatrix::from_rows(
        rows,
        table.dim,
        Representation::Dense,
        docs.iter().map(|d| d.id).collect(),
    )
    .expect("average_embed returns table.dim values")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: u64, toks: &[&str]) -> TokenDoc {
        TokenDoc {
            id,
            tokens: toks.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn two_docs() -> Vec<TokenDoc> {
        vec![doc(0, &["good", "product"]), doc(1, &["bad", "product"])]
    }

    #[test]
    fn vocabulary_examples() {
        let v = build_vocabulary(&two_docs(), 1).unwrap();
        assert_eq!(v.terms(), ["bad", "good", "product"]);
        assert_eq!(
            (v.doc_freq("bad"), v.doc_freq("good"), v.doc_freq("product")),
            (Some(1), Some(1), Some(2))
        );
        assert_eq!(v.n_docs(), 2);
        assert_eq!(build_vocabulary(&two_docs(), 2).unwrap().terms(), ["product"]);
        assert!(matches!(
            build_vocabulary(&[doc(0, &[]), doc(1, &[])], 1),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn count_examples() {
        let v = build_vocabulary(&two_docs(), 1).unwrap();
        let m = count_vectorize(
            &[doc(5, &["good", "good", "product"]), doc(6, &[]), doc(7, &["unseen"])],
            &v,
        );
        assert_eq!(m.row(0), [0.0, 2.0, 1.0]);
        assert_eq!(m.row(1), [0.0; 3]);
        assert_eq!(m.row(2), [0.0; 3]);
        assert_eq!(m.row_ids, vec![5, 6, 7]);
    }

    #[test]
    fn idf_at_full_document_frequency_is_one() {
        assert_eq!(idf(7, 7), 1.0);
        let v = build_vocabulary(&two_docs(), 1).unwrap();
        let m = tfidf_transform(&count_vectorize(&[doc(0, &["product"]), doc(1, &[])], &v), &v).unwrap();
        assert_eq!(m.row(0), [0.0, 0.0, 1.0]);
        assert_eq!(m.row(1), [0.0; 3]);
    }

    #[test]
    fn average_examples() {
        let table = EmbeddingTable {
            dim: 2,
            vectors: [("a".to_string(), vec![1.0, 0.0]), ("b".to_string(), vec![0.0, 1.0])]
                .into_iter()
                .collect(),
        };
        assert_eq!(average_embed(&doc(0, &["a", "b"]), &table), [0.5, 0.5]);
        assert_eq!(average_embed(&doc(0, &[]), &table), [0.0, 0.0]);
        let v = average_embed(&doc(0, &["a", "a", "b"]), &table);
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-15 && (v[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(average_embed(&doc(0, &["zzz"]), &table), [0.0, 0.0]);
    }

    #[test]
    fn word_embedding_file() {
        let t = read_word_embeddings("2 3\na 1 2 3\nb 4 5 6\n".as_bytes(), "w").unwrap();
        assert_eq!((t.len(), t.dim), (2, 3));
        assert_eq!(t.get("b"), Some(&[4.0, 5.0, 6.0][..]));
        match read_word_embeddings("2 3\na 1 2 3\nb 4 5\n".as_bytes(), "w").unwrap_err() {
            Error::DimMismatchAt { line, expected, found, .. } => assert_eq!((line, expected, found), (3, 3, 2)),
            e => panic!("{e}"),
        }
        assert!(matches!(
            read_word_embeddings("two 3\n".as_bytes(), "w"),
            Err(Error::BadHeader { .. })
        ));
        assert!(matches!(
            read_word_embeddings("1 1\na NaN\n".as_bytes(), "w"),
            Err(Error::NonFiniteValue { line: 2, .. })
        ));
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        assert_eq!(read_word_embeddings(buf.as_slice(), "w").unwrap(), t);
    }

    #[test]
    fn doc_embedding_file() {
        let text = "id\tv1\tv2\tv3\tv4\n0\t1\t2\t3\t4\n1\t0\t0\t0\t0\n2\t1\t1\t1\t1\n";
        let src = DocEmbeddings::read(text.as_bytes(), "d").unwrap();
        let m = src.matrix_for(&[0, 1, 2]).unwrap();
        assert_eq!((m.n_rows, m.n_cols), (3, 4));
        assert_eq!(m.row(0), [1.0, 2.0, 3.0, 4.0]);
        let src = DocEmbeddings::read("id\tv1\n0\t1\n1\t2\n".as_bytes(), "d").unwrap();
        assert!(matches!(src.matrix_for(&[0, 1, 2]), Err(Error::MissingId(2))));
        assert!(matches!(
            DocEmbeddings::read("id\tv1\n0\t1\n0\t2\n".as_bytes(), "d"),
            Err(Error::DuplicateId(0))
        ));
        assert!(matches!(
            DocEmbeddings::read("id\tv1\tv2\n0\t1\n".as_bytes(), "d"),
            Err(Error::DimMismatchAt { line: 2, .. })
        ));
    }

    #[test]
    fn standardize_examples() {
        let (m, s) = standardize(&FeatureMatrix::dense(vec![vec![0.0, 5.0], vec![2.0, 5.0]]));
        assert_eq!(s.mean, [1.0, 5.0]);
        assert_eq!(s.std[0], 1.0);
        assert_eq!(s.std[1], STD_FLOOR);
        assert_eq!(m.row(0), [-1.0, 0.0]);
        assert_eq!(m.row(1), [1.0, 0.0]);
        let three = FeatureMatrix::dense(vec![vec![5.0], vec![5.0], vec![5.0]]);
        let (z, s) = standardize(&three);
        assert!(z.rows().all(|r| r == [0.0]));
        assert_eq!(s.transform(&three).unwrap(), z);
    }

    #[test]
    fn vocabulary_serde_rebuilds_index() {
        let v = build_vocabulary(&two_docs(), 1).unwrap();
        let back: Vocabulary = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back.index_of("product"), Some(2));
        assert_eq!(back, v);
    }

    #[test]
    fn featurizer_uses_training_statistics() {
        let train = two_docs();
        let f = Featurizer::fit_tfidf(&train, 1).unwrap();
        let test = vec![doc(9, &["novel", "words"]), doc(10, &["good"])];
        let m = f.transform(&test, None).unwrap();
        assert_eq!(m.row(0), [0.0; 3]);
        assert_eq!(f.annihilated(&test), [true, false]);
        assert_eq!(m.row_ids, vec![9, 10]);
    }
}
