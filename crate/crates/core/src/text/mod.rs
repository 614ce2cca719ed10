//! Review text normalization: emoji removal, lowercasing, punctuation
//! stripping, tokenization, stopword removal and stemming or lemmatization.

pub mod charsets;
pub mod porter;

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data_io::RawReview;
use crate::error::{Error, Result};

pub use charsets::{is_emoji, is_punct};

const DEFAULT_STOPWORDS: &str = include_str!("../../resources/stopwords_en.txt");
const DEFAULT_LEMMAS: &str = include_str!("../../resources/lemmas_en.tsv");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub id: u64,
    pub tokens: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Lowercase,
    StripPunct,
    Tokenize,
    StripStopwords,
    Stem,
    Lemmatize,
    StripEmoji,
}

impl Step {
    fn is_token_level(self) -> bool {
        matches!(self, Step::StripStopwords | Step::Stem | Step::Lemmatize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub steps: Vec<Step>,
    /// `None` selects the built-in English list.
    #[serde(default)]
    pub stopword_list: Option<PathBuf>,
    /// `None` selects the built-in lemma table.
    #[serde(default)]
    pub lemma_table: Option<PathBuf>,
}

impl Default for PipelineConfig {
    /// emoji → lowercase → punctuation → tokenize → stopwords → stem
    fn default() -> Self {
        Self {
            steps: vec![
                Step::StripEmoji,
                Step::Lowercase,
                Step::StripPunct,
                Step::Tokenize,
                Step::StripStopwords,
                Step::Stem,
            ],
            stopword_list: None,
            lemma_table: None,
        }
    }
}

impl PipelineConfig {
    /// The default profile with dictionary lemmatization in place of stemming.
    pub fn lemmatizing() -> Self {
        let mut cfg = Self::default();
        for s in cfg.steps.iter_mut() {
            if *s == Step::Stem {
                *s = Step::Lemmatize;
            }
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let Some(tok) = self.steps.iter().position(|s| *s == Step::Tokenize) else {
            return Err(Error::BadPipeline("`tokenize` step is required".into()));
        };
        if self.steps.iter().filter(|s| **s == Step::Tokenize).count() > 1 {
            return Err(Error::BadPipeline("`tokenize` appears more than once".into()));
        }
        for (i, s) in self.steps.iter().enumerate() {
            if s.is_token_level() && i < tok {
                return Err(Error::BadPipeline(format!("{s:?} must come after tokenize")));
            }
            if !s.is_token_level() && *s != Step::Tokenize && i > tok {
                return Err(Error::BadPipeline(format!("{s:?} must come before tokenize")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map(|s| Self::parse(&s))
            .map_err(|_| Error::StopwordFileMissing(path.to_path_buf()))
    }

    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LemmaTable(HashMap<String, String>);

impl LemmaTable {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEMMAS)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map(|s| Self::parse(&s))
            .map_err(|_| Error::LemmaFileMissing(path.to_path_buf()))
    }

    /// `word<TAB>lemma` per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
                .filter_map(|l| {
                    let (w, lemma) = l.split_once('\t')?;
                    Some((w.trim().to_string(), lemma.trim().to_string()))
                })
                .collect(),
        )
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.0.get(word).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Unicode simple lowercase mapping, one char at a time.
pub fn lowercase(text: &str) -> String {
    text.chars()
        .map(|c| c.to_lowercase().next().unwrap_or(c))
        .collect()
}

pub fn strip_punct(text: &str) -> String {
    text.chars().map(|c| if is_punct(c) { ' ' } else { c }).collect()
}

pub fn strip_emoji(text: &str) -> String {
    text.chars().filter(|c| !is_emoji(*c)).collect()
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub fn strip_stopwords(tokens: Vec<String>, stopwords: &Stopwords) -> Vec<String> {
    tokens.into_iter().filter(|t| !stopwords.contains(t)).collect()
}

pub fn stem(tokens: Vec<String>) -> Vec<String> {
    tokens.iter().map(|t| porter::stem(t)).collect()
}

pub fn lemmatize(tokens: Vec<String>, table: &LemmaTable) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| match table.get(&t) {
            Some(l) if !l.is_empty() => l.to_string(),
            _ => t,
        })
        .collect()
}

/// A validated pipeline with its word lists loaded. Cheap to clone and safe
/// to share between threads.
#[derive(Clone, Debug)]
pub struct Preprocessor {
    steps: Vec<Step>,
    stopwords: Arc<Stopwords>,
    lemmas: Arc<LemmaTable>,
}

impl Preprocessor {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let stopwords = match &cfg.stopword_list {
            Some(p) => Stopwords::load(p)?,
            None => Stopwords::builtin(),
        };
        let lemmas = match &cfg.lemma_table {
            Some(p) => LemmaTable::load(p)?,
            None => LemmaTable::builtin(),
        };
        Ok(Self {
            steps: cfg.steps.clone(),
            stopwords: Arc::new(stopwords),
            lemmas: Arc::new(lemmas),
        })
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        let mut text = text.to_string();
        let mut tokens = Vec::new();
        for step in &self.steps {
            match step {
                Step::Lowercase => text = lowercase(&text),
                Step::StripPunct => text = strip_punct(&text),
                Step::StripEmoji => text = strip_emoji(&text),
                Step::Tokenize => tokens = tokenize(&text),
                Step::StripStopwords => tokens = strip_stopwords(tokens, &self.stopwords),
                Step::Stem => tokens = stem(tokens),
                Step::Lemmatize => tokens = lemmatize(tokens, &self.lemmas),
            }
        }
        tokens
    }

    pub fn preprocess(&self, review: &RawReview) -> TokenDoc {
        TokenDoc {
            id: review.id,
            tokens: self.tokens(&review.text),
        }
    }

    pub fn preprocess_all(&self, reviews: &[RawReview]) -> Vec<TokenDoc> {
        reviews.iter().map(|r| self.preprocess(r)).collect()
    }
}

pub fn preprocess(review: &RawReview, cfg: &PipelineConfig) -> Result<TokenDoc> {
    Ok(Preprocessor::new(cfg)?.preprocess(review))
}

/// One `{"id": .., "tokens": [..]}` object per line.
pub fn write_token_docs_jsonl<W: Write>(docs: &[TokenDoc], mut out: W) -> Result<()> {
    for d in docs {
        serde_json::to_writer(&mut out, d)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
