//! `fakerev`: batch command-line front end.
//!
//! Standard output carries only the declared artifact or a summary line;
//! logs and errors go to standard error. Exit status is 0 on success, 1 for
//! user errors (bad flags, files or data) and 2 for internal failures.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use fakerev_core::bundle::{evaluate_bundle, load_model, save_model, train_bundle, EvalScope};
use fakerev_core::classifiers::ModelKind;
use fakerev_core::data_io::{
    concat_datasets, drop_unlabeled, load_reviews_csv, load_reviews_csv_with, train_test_split,
    write_dataset_csv, Dataset, LoadOptions,
};
use fakerev_core::embedding::{train_sgns, write_training_log};
use fakerev_core::experiment::{benchmark_grid, RunConfig, Sources};
use fakerev_core::synthetic::{review_corpus, ReviewCorpusConfig};
use fakerev_core::text::{write_token_docs_jsonl, PipelineConfig, Preprocessor};
use fakerev_core::vectorize::{load_word_embeddings, DocEmbeddings, RepresentationKind};

#[derive(Parser)]
#[command(name = "fakerev", version, about = "Fake review detection with classic classifiers and hard voting")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON file overriding any run configuration field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the split, models and embedding training [default: 9].
    #[arg(long)]
    seed: Option<u64>,
    /// Held-out share of labeled rows [default: 0.2].
    #[arg(long)]
    test_fraction: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Merge review CSV files into one canonical CSV.
    Ingest {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Keep only rows with a 0/1 label.
        #[arg(long)]
        drop_unlabeled: bool,
    },
    /// Tokenize reviews into JSON lines.
    Preprocess {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Dictionary lemmatization instead of Porter stemming.
        #[arg(long)]
        lemmatize: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train word vectors (skip-gram, negative sampling) on review text.
    EmbedTrain {
        #[arg(long)]
        data: PathBuf,
        /// Output in word2vec text format.
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch JSON-lines training log.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Train on every row instead of the training side of the split.
        #[arg(long)]
        all_rows: bool,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        negatives: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit a representation and model on the training split; write a bundle.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "repr")]
        representation: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        word_emb: Option<PathBuf>,
        #[arg(long)]
        doc_emb: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score a bundle on labeled data.
    Evaluate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        doc_emb: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Scope::Test)]
        split: Scope,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Label reviews with a bundle.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Prediction CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        doc_emb: Option<PathBuf>,
    },
    /// Accuracy of every model under every representation on one split.
    Benchmark {
        /// Labeled review CSV. Omit with --synthetic.
        #[arg(long, required_unless_present = "synthetic")]
        data: Option<PathBuf>,
        /// Use the built-in synthetic corpus (and its document vectors).
        #[arg(long, conflicts_with = "data")]
        synthetic: bool,
        #[arg(long)]
        word_emb: Option<PathBuf>,
        #[arg(long)]
        doc_emb: Option<PathBuf>,
        /// Grid CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid with full per-cell reports as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write the synthetic review corpus and its document vectors.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        doc_emb_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Test,
    All,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    match std::panic::catch_unwind(|| run(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", render_chain(&e));
            ExitCode::from(exit_code(&e))
        }
        // the panic hook has already printed the message
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(2)
        }
    }
}

/// 2 when any cause is an internal invariant violation, else 1.
fn exit_code(e: &anyhow::Error) -> u8 {
    let internal = e
        .chain()
        .filter_map(|c| c.downcast_ref::<fakerev_core::Error>())
        .any(fakerev_core::Error::is_internal);
    if internal {
        2
    } else {
        1
    }
}

/// The error and its causes joined by `: `, skipping causes whose text the
/// previous message already includes.
fn render_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open config {}", p.display()))?;
            serde_json::from_reader(f).with_context(|| format!("bad config {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(f) = args.test_fraction {
        cfg.test_fraction = f;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writer for `path`, or standard output.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_doc_emb(path: Option<&PathBuf>) -> Result<Option<DocEmbeddings>> {
    path.map(|p| DocEmbeddings::load(p).map_err(Into::into)).transpose()
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest {
            inputs,
            out,
            drop_unlabeled: only_labeled,
        } => {
            let mut parts = Vec::with_capacity(inputs.len());
            let mut rejected = 0;
            for p in &inputs {
                let (ds, report) = load_reviews_csv_with(p, LoadOptions::default())?;
                rejected += report.rejected.len();
                parts.push(ds);
            }
            let mut ds = concat_datasets(parts);
            if only_labeled {
                ds = drop_unlabeled(ds);
            }
            let mut w = create(&out)?;
            write_dataset_csv(&ds, &mut w)?;
            w.flush()?;
            println!(
                "ingested {} rows from {} files ({rejected} rejected)",
                ds.len(),
                inputs.len()
            );
        }
        Command::Preprocess {
            data,
            out,
            lemmatize,
            config,
        } => {
            let pipeline = match config {
                Some(p) => serde_json::from_reader(File::open(&p).with_context(|| p.display().to_string())?)?,
                None if lemmatize => PipelineConfig::lemmatizing(),
                None => PipelineConfig::default(),
            };
            let ds = load_reviews_csv(&data)?;
            let docs = Preprocessor::new(&pipeline)?.preprocess_all(&ds.reviews);
            let mut w = create(&out)?;
            write_token_docs_jsonl(&docs, &mut w)?;
            w.flush()?;
            let tokens: usize = docs.iter().map(|d| d.tokens.len()).sum();
            println!("preprocessed {} documents ({tokens} tokens)", docs.len());
        }
        Command::EmbedTrain {
            data,
            out,
            log,
            all_rows,
            dim,
            window,
            negatives,
            epochs,
            run,
        } => {
            let mut cfg = run_config(&run)?;
            let s = &mut cfg.sgns;
            s.dim = dim.unwrap_or(s.dim);
            s.window = window.unwrap_or(s.window);
            s.negatives = negatives.unwrap_or(s.negatives);
            s.epochs = epochs.unwrap_or(s.epochs);
            let ds = load_reviews_csv(&data)?;
            let rows = if all_rows {
                ds
            } else {
                train_test_split(&ds, &cfg.split())?.0
            };
            let docs = Preprocessor::new(&cfg.pipeline)?.preprocess_all(&rows.reviews);
            let trained = train_sgns(&docs, &cfg.sgns)?;
            let mut w = create(&out)?;
            trained.table.write_text(&mut w)?;
            w.flush()?;
            if let Some(p) = log {
                let mut w = create(&p)?;
                write_training_log(&trained.log, &mut w)?;
                w.flush()?;
            }
            let last = trained.log.last().map(|e| e.mean_loss).unwrap_or(f64::NAN);
            println!(
                "trained {} word vectors (dim {}) on {} documents; final mean loss {last:.6}",
                trained.table.len(),
                trained.table.dim,
                docs.len()
            );
        }
        Command::Train {
            data,
            representation,
            model,
            out,
            word_emb,
            doc_emb,
            run,
        } => {
            let mut cfg = run_config(&run)?;
            if let Some(r) = representation {
                cfg.representation = RepresentationKind::parse(&r)?;
            }
            if let Some(m) = model {
                cfg.model = ModelKind::parse(&m)?;
            }
            let ds = load_reviews_csv(&data)?;
            let sources = Sources {
                word_emb: word_emb.as_ref().map(load_word_embeddings).transpose()?,
                doc_emb: load_doc_emb(doc_emb.as_ref())?,
            };
            let mut bundle = train_bundle(&ds, &sources, &cfg, now_unix())?;
            bundle.metadata.embedding_source = match cfg.representation {
                RepresentationKind::Word2vec => word_emb.map(|p| p.display().to_string()),
                RepresentationKind::DocEmb => doc_emb.map(|p| p.display().to_string()),
                RepresentationKind::Tfidf => None,
            };
            save_model(&bundle, &out)?;
            println!(
                "trained {} on {}: {} rows, train accuracy {:.4}",
                cfg.model.name(),
                cfg.representation.name(),
                bundle.metadata.n_train,
                bundle.metadata.train_accuracy
            );
        }
        Command::Evaluate {
            bundle,
            data,
            doc_emb,
            split,
            report,
        } => {
            let b = load_model(&bundle)?;
            let ds = load_reviews_csv(&data)?;
            let scope = match split {
                Scope::Test => EvalScope::Test,
                Scope::All => EvalScope::All,
            };
            let r = evaluate_bundle(&b, &ds, load_doc_emb(doc_emb.as_ref())?.as_ref(), scope)?;
            if let Some(p) = report {
                let mut w = create(&p)?;
                serde_json::to_writer_pretty(&mut w, &r)?;
                writeln!(w)?;
                w.flush()?;
            }
            let c = r.confusion;
            println!(
                "accuracy {:.4} on {} rows; confusion [[{}, {}], [{}, {}]]",
                r.accuracy, r.n_test, c[0][0], c[0][1], c[1][0], c[1][1]
            );
        }
        Command::Predict {
            bundle,
            input,
            out,
            doc_emb,
        } => {
            let b = load_model(&bundle)?;
            let (ds, _) = load_reviews_csv_with(&input, LoadOptions { keep_empty_text: true })?;
            let preds = b.predict_reviews(&ds.reviews, load_doc_emb(doc_emb.as_ref())?.as_ref())?;
            write_predictions(&ds, &preds, &b.member_names(), sink(out.as_deref())?)?;
            if let Some(p) = out {
                info!("wrote {} predictions to {}", preds.len(), p.display());
                println!("predicted {} rows", preds.len());
            }
        }
        Command::Benchmark {
            data,
            synthetic,
            word_emb,
            doc_emb,
            out,
            json,
            run,
        } => {
            let cfg = run_config(&run)?;
            let (ds, generated_emb) = match data {
                Some(p) => (load_reviews_csv(&p)?, None),
                None => {
                    debug_assert!(synthetic);
                    let c = review_corpus(&ReviewCorpusConfig::default());
                    (c.dataset, Some(c.doc_embeddings))
                }
            };
            let sources = Sources {
                word_emb: word_emb.as_ref().map(load_word_embeddings).transpose()?,
                doc_emb: load_doc_emb(doc_emb.as_ref())?.or(generated_emb),
            };
            let grid = benchmark_grid(&ds, &sources, &cfg)?;
            let mut w = sink(out.as_deref())?;
            grid.write_csv(&mut w)?;
            w.flush()?;
            if let Some(p) = json {
                let mut w = create(&p)?;
                grid.write_json(&mut w)?;
                writeln!(w)?;
                w.flush()?;
            }
            if let Some(p) = out {
                println!(
                    "wrote {}x{} grid to {} ({} train / {} test rows)",
                    RepresentationKind::ALL.len(),
                    grid.cells.len() / RepresentationKind::ALL.len(),
                    p.display(),
                    grid.n_train,
                    grid.n_test
                );
            }
        }
        Command::Synth {
            out,
            doc_emb_out,
            n,
            seed,
        } => {
            let c = review_corpus(&ReviewCorpusConfig {
                n_reviews: n,
                seed,
                ..Default::default()
            });
            let mut w = create(&out)?;
            write_dataset_csv(&c.dataset, &mut w)?;
            w.flush()?;
            if let Some(p) = doc_emb_out {
                let mut w = create(&p)?;
                c.doc_embeddings.write_tsv(&mut w)?;
                w.flush()?;
            }
            println!("wrote {} synthetic reviews", c.dataset.len());
        }
    }
    Ok(())
}

fn write_predictions<W: Write>(
    ds: &Dataset,
    preds: &[fakerev_core::bundle::Prediction],
    members: &[String],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "review".into(), "predicted_label".into(), "annihilated".into()];
    header.extend(members.iter().map(|m| format!("vote_{m}")));
    w.write_record(&header)?;
    for (r, p) in ds.reviews.iter().zip(preds) {
        let mut row = vec![
            r.id.to_string(),
            r.text.clone(),
            p.label.to_string(),
            u8::from(p.annihilated).to_string(),
        ];
        if let Some(v) = &p.votes {
            row.extend(v.iter().map(u8::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
