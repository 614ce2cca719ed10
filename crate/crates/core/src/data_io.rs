//! Review CSV ingestion, concatenation and holdout splitting.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeedRng, DEFAULT_SEED};

/// Canonical column names. Header matching is case-insensitive and treats
/// spaces as underscores, so `Collected By` matches `collected_by`.
pub const COLUMNS: [&str; 5] = ["url", "rating", "review", "collected_by", "label"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawReview {
    pub id: u64,
    pub url: String,
    pub rating: Option<f64>,
    pub text: String,
    pub collected_by: String,
    /// 0 = fake/useless, 1 = genuine/useful.
    pub label: Option<u8>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub reviews: Vec<RawReview>,
    pub source_files: Vec<PathBuf>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.reviews.iter().map(|r| r.id).collect()
    }

    /// Labels of every review; `None` if any review is unlabeled.
    pub fn labels(&self) -> Option<Vec<u8>> {
        self.reviews.iter().map(|r| r.label).collect()
    }

    fn renumbered(mut self) -> Self {
        for (i, r) in self.reviews.iter_mut().enumerate() {
            r.id = i as u64;
        }
        self
    }
}

/// A row that was read but not kept.
#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    /// 1-based line number in the source file (the header is line 1).
    pub row: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoadReport {
    pub data_rows: usize,
    pub rejected: Vec<Rejection>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Keep rows whose review text is blank. Prediction inputs need this so
    /// every input row gets an output row.
    pub keep_empty_text: bool,
}

pub fn load_reviews_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    load_reviews_csv_with(path, LoadOptions::default()).map(|(ds, _)| ds)
}

pub fn load_reviews_csv_with(
    path: impl AsRef<Path>,
    opts: LoadOptions,
) -> Result<(Dataset, LoadReport)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::path(path, e))?;
    let (mut ds, report) = read_reviews(file, &path.display().to_string(), opts)?;
    ds.source_files.push(path.to_path_buf());
    Ok((ds, report))
}

/// Parse review rows from any reader; `origin` names the source in errors.
pub fn read_reviews<R: Read>(
    reader: R,
    origin: &str,
    opts: LoadOptions,
) -> Result<(Dataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut cols: HashMap<&'static str, usize> = HashMap::new();
    let mut id_col = None;
    for (i, h) in headers.iter().enumerate() {
        let norm = h.trim().trim_start_matches('\u{feff}').to_lowercase().replace(' ', "_");
        if let Some(c) = COLUMNS.iter().find(|c| **c == norm) {
            cols.entry(c).or_insert(i);
        } else if norm == "id" && id_col.is_none() {
            id_col = Some(i);
        }
    }
    let Some(&review_col) = cols.get("review") else {
        return Err(Error::MissingColumn {
            path: origin.to_string(),
            column: "review".into(),
        });
    };
    let width = headers.len();
    let field = |rec: &csv::StringRecord, name: &str| -> String {
        cols.get(name)
            .and_then(|&i| rec.get(i))
            .unwrap_or("")
            .to_string()
    };

    let mut reviews = Vec::new();
    let mut report = LoadReport::default();
    let mut seen_ids = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        report.data_rows += 1;
        if rec.len() != width {
            return Err(Error::MalformedRow {
                path: origin.to_string(),
                row,
                expected: width,
                found: rec.len(),
            });
        }
        // an explicit id column wins; otherwise the 0-based data row index,
        // which stays stable when blank rows are dropped
        let id = match id_col.and_then(|i| rec.get(i)).map(str::trim) {
            Some(v) if !v.is_empty() => v.parse::<u64>().map_err(|_| Error::BadId {
                path: origin.to_string(),
                row,
                value: v.to_string(),
            })?,
            _ => (report.data_rows - 1) as u64,
        };
        if !seen_ids.insert(id) {
            return Err(Error::DuplicateRowId {
                path: origin.to_string(),
                id,
            });
        }
        let label = match field(&rec, "label").trim() {
            "" => None,
            "0" => Some(0),
            "1" => Some(1),
            other => {
                return Err(Error::BadLabel {
                    path: origin.to_string(),
                    row,
                    value: other.to_string(),
                })
            }
        };
        let text = rec.get(review_col).unwrap_or("").to_string();
        if text.trim().is_empty() && !opts.keep_empty_text {
            warn!("{origin}: row {row}: empty review text, row dropped");
            report.rejected.push(Rejection {
                row,
                reason: "empty review text".into(),
            });
            continue;
        }
        let rating_raw = field(&rec, "rating");
        let rating = match rating_raw.trim() {
            "" => None,
            s => match s.parse::<f64>() {
                Ok(v) if (1.0..=5.0).contains(&v) => Some(v),
                _ => {
                    warn!("{origin}: row {row}: rating `{s}` outside [1,5], treated as absent");
                    None
                }
            },
        };
        reviews.push(RawReview {
            id,
            url: field(&rec, "url"),
            rating,
            text,
            collected_by: field(&rec, "collected_by"),
            label,
        });
    }
    Ok((
        Dataset {
            reviews,
            source_files: Vec::new(),
        },
        report,
    ))
}

pub fn concat_datasets(parts: Vec<Dataset>) -> Dataset {
    let mut out = Dataset::default();
    for part in parts {
        out.reviews.extend(part.reviews);
        out.source_files.extend(part.source_files);
    }
    out.renumbered()
}

pub fn drop_unlabeled(ds: Dataset) -> Dataset {
    let before = ds.len();
    let reviews: Vec<_> = ds.reviews.into_iter().filter(|r| r.label.is_some()).collect();
    if reviews.is_empty() && before > 0 {
        warn!("none of the {before} rows carries a label; dataset is now empty");
    }
    Dataset {
        reviews,
        source_files: ds.source_files,
    }
    .renumbered()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub stratify: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: DEFAULT_SEED,
            stratify: false,
        }
    }
}

/// Seeded holdout split over the labeled rows of `ds`. Review ids are kept,
/// and each side preserves the dataset's row order.
pub fn train_test_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let labeled: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.reviews[i].label.is_some())
        .collect();
    let n = labeled.len();
    let degenerate = || Error::DegenerateSplit {
        n,
        test_fraction: spec.test_fraction,
    };
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) || n < 2 {
        return Err(degenerate());
    }
    let mut rng = SeedRng::new(spec.seed).stream();
    let mut is_test = vec![false; ds.len()];
    if spec.stratify {
        for class in [0u8, 1] {
            let mut members: Vec<usize> = labeled
                .iter()
                .copied()
                .filter(|&i| ds.reviews[i].label == Some(class))
                .collect();
            fisher_yates(&mut members, &mut rng);
            let k = test_count(members.len(), spec.test_fraction);
            for &i in &members[..k] {
                is_test[i] = true;
            }
        }
    } else {
        let mut order = labeled.clone();
        fisher_yates(&mut order, &mut rng);
        for &i in &order[..test_count(n, spec.test_fraction)] {
            is_test[i] = true;
        }
    }
    let n_test = is_test.iter().filter(|t| **t).count();
    if n_test == 0 || n_test == n {
        return Err(degenerate());
    }
    let side = |want_test: bool| Dataset {
        reviews: labeled
            .iter()
            .filter(|&&i| is_test[i] == want_test)
            .map(|&i| ds.reviews[i].clone())
            .collect(),
        source_files: ds.source_files.clone(),
    };
    Ok((side(false), side(true)))
}

fn test_count(n: usize, fraction: f64) -> usize {
    ((n as f64) * fraction).ceil() as usize
}

/// Durstenfeld's in-place shuffle, walking from the back.
pub(crate) fn fisher_yates<T, R: Rng>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = if i < u32::MAX as usize {
            rng.gen_range(0..(i + 1) as u32) as usize
        } else {
            rng.gen_range(0..=i)
        };
        items.swap(i, j);
    }
}

/// Writes the canonical `id,url,rating,review,collected_by,label` form.
pub fn write_dataset_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "url", "rating", "review", "collected_by", "label"])?;
    for r in &ds.reviews {
        w.write_record([
            r.id.to_string(),
            r.url.clone(),
            r.rating.map(|v| v.to_string()).unwrap_or_default(),
            r.text.clone(),
            r.collected_by.clone(),
            r.label.map(|l| l.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
