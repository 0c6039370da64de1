use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use hsearch_core::dataset::{self, read_split, Review, SPLIT_NAMES};
use hsearch_core::eval::{confusion_counts, LabelPair, MetricsReport};
use hsearch_core::{build_index, search_hybrid, tokenize, Encoder, SearchHit, VectorIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{RunConfig, SearchMode};
use crate::store::{encoder_ids, DocRecord, IndexBundle, Manifest};

/// Characters of document text shown per search hit unless `full` is set.
pub const SNIPPET_CHARS: usize = 80;

pub const INGEST_REPORT: &str = "ingest_report.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestReport {
    pub corpus: String,
    pub total_lines: usize,
    pub loaded: usize,
    pub skipped: usize,
    pub skipped_lines: Vec<usize>,
    pub after_business_filter: usize,
    pub distribution: BTreeMap<u8, f64>,
    pub split_sizes: BTreeMap<String, usize>,
    pub split_distribution: BTreeMap<String, BTreeMap<u8, f64>>,
    pub train_per_class: Option<usize>,
    pub seed: u64,
}

fn read_business_ids(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading business ids {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

/// Loads the raw corpus, optionally filters by business, splits it and
/// writes the split files plus a distribution report into `data_dir`.
pub fn ingest(cfg: &RunConfig, out: &mut dyn Write) -> Result<IngestReport> {
    let corpus = &cfg.paths.corpus;
    let loaded = dataset::load_reviews(corpus)?;
    if loaded.skipped() > 0 {
        eprintln!(
            "warning: skipped {} malformed line(s) in {}",
            loaded.skipped(),
            corpus.display()
        );
    }
    let reviews = match &cfg.paths.business_ids {
        Some(path) => dataset::filter_by_business(&loaded.reviews, &read_business_ids(path)?),
        None => loaded.reviews.clone(),
    };
    if reviews.is_empty() {
        bail!("no usable reviews in {}", corpus.display());
    }
    let spec = cfg.split_spec();
    let mut bundle = dataset::split(&reviews, &spec)?;
    if let Some(per_class) = spec.train_per_class {
        bundle
            .balance_train(per_class, spec.seed)
            .context("balancing the training split")?;
    }
    bundle.write_jsonl(&cfg.paths.data_dir)?;

    let mut split_sizes = BTreeMap::new();
    let mut split_distribution = BTreeMap::new();
    for (name, records) in bundle.splits() {
        split_sizes.insert(name.to_owned(), records.len());
        if !records.is_empty() {
            split_distribution.insert(name.to_owned(), dataset::class_distribution(records)?);
        }
    }
    let report = IngestReport {
        corpus: corpus.display().to_string(),
        total_lines: loaded.total_lines,
        loaded: loaded.reviews.len(),
        skipped: loaded.skipped(),
        skipped_lines: loaded.skipped_lines.clone(),
        after_business_filter: reviews.len(),
        distribution: dataset::class_distribution(&reviews)?,
        split_sizes,
        split_distribution,
        train_per_class: spec.train_per_class,
        seed: spec.seed,
    };
    let report_path = cfg.paths.data_dir.join(INGEST_REPORT);
    hsearch_core::io::write_atomic(&report_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n")
    })?;
    serde_json::to_writer(&mut *out, &report)?;
    writeln!(out)?;
    Ok(report)
}

/// Reads the split files of `data_dir` in train, validation, test order.
pub fn read_ingested(data_dir: &Path) -> Result<Vec<Review>> {
    let mut all = Vec::new();
    for name in SPLIT_NAMES {
        let path = data_dir.join(format!("{name}.jsonl"));
        all.extend(read_split(&path).with_context(|| {
            format!("reading {} (run `ingest` first)", path.display())
        })?);
    }
    Ok(all)
}

/// Builds the lexical and vector indexes over the ingested documents and
/// writes them to `index_dir`.
pub fn index(cfg: &RunConfig, out: &mut dyn Write) -> Result<Manifest> {
    let reviews = read_ingested(&cfg.paths.data_dir)?;
    if reviews.is_empty() {
        eprintln!("warning: ingested corpus is empty; writing empty indexes");
    }
    let tokens: Vec<Vec<String>> = reviews
        .par_iter()
        .map(|r| tokenize(&r.text, &cfg.tokenizer))
        .collect();
    let lexical = build_index(&tokens);

    let enc_cfg = cfg.encoder_config(lexical.num_terms() + 1);
    let encoder = Encoder::from_seed(enc_cfg)?;
    let max_len = encoder.config().max_seq_len;
    // chunks come back in input order, so doc ids stay aligned
    let embeddings = tokens
        .par_chunks(cfg.encoder.batch_size)
        .map(|batch| {
            batch
                .iter()
                .map(|t| encoder.encode(&encoder_ids(t, &lexical, max_len)))
                .collect::<hsearch_core::Result<Vec<_>>>()
        })
        .collect::<hsearch_core::Result<Vec<_>>>()?;
    let mut vectors = VectorIndex::new(encoder.config().d_model);
    for (doc_id, e) in embeddings.iter().flatten().enumerate() {
        vectors.add_vector(doc_id as u32, e)?;
    }

    let docs = reviews
        .into_iter()
        .enumerate()
        .map(|(doc_id, r)| DocRecord {
            doc_id: doc_id as u32,
            record_id: r.record_id,
            stars: r.stars,
            text: r.text,
        })
        .collect();
    let manifest = Manifest {
        format_version: 1,
        docs: lexical.num_docs(),
        terms: lexical.num_terms(),
        vectors: vectors.len(),
        dim: vectors.dim(),
        seed: cfg.seed,
        tokenizer: cfg.tokenizer,
    };
    let bundle = IndexBundle {
        manifest: manifest.clone(),
        lexical,
        vectors,
        encoder,
        docs,
    };
    bundle.save(&cfg.paths.index_dir)?;
    serde_json::to_writer(
        &mut *out,
        &json!({
            "docs": manifest.docs,
            "terms": manifest.terms,
            "vectors": manifest.vectors,
            "dim": manifest.dim,
            "index_dir": cfg.paths.index_dir.display().to_string(),
        }),
    )?;
    writeln!(out)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub rank: usize,
    pub doc_id: u32,
    pub score: f64,
    pub record_id: usize,
    pub stars: u8,
    pub text: String,
}

/// Runs one query against a loaded bundle.
pub fn run_query(
    bundle: &IndexBundle,
    query: &str,
    mode: SearchMode,
    cfg: &RunConfig,
) -> Result<Vec<SearchHit>> {
    let tokens = bundle.tokenize(query);
    let k = cfg.search.k;
    Ok(match mode {
        SearchMode::Lexical => bundle.lexical.search(&tokens, k),
        SearchMode::Vector => bundle.vectors.search(&bundle.embed(&tokens)?, k)?,
        SearchMode::Hybrid => search_hybrid(
            &bundle.lexical,
            &bundle.vectors,
            &tokens,
            &bundle.embed(&tokens)?,
            &cfg.hybrid(),
        )?,
    })
}

fn snippet(text: &str, full: bool) -> String {
    if full {
        text.to_owned()
    } else {
        text.chars().take(SNIPPET_CHARS).collect()
    }
}

/// Prints ranked results for `query` as JSON lines.
pub fn search(cfg: &RunConfig, query: &str, out: &mut dyn Write) -> Result<Vec<SearchResult>> {
    let bundle = IndexBundle::load(&cfg.paths.index_dir)?;
    let hits = run_query(&bundle, query, cfg.search.mode, cfg)?;
    let results: Vec<SearchResult> = hits
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let doc = &bundle.docs[h.doc_id as usize];
            SearchResult {
                rank: i + 1,
                doc_id: h.doc_id,
                score: h.score,
                record_id: doc.record_id,
                stars: doc.stars,
                text: snippet(&doc.text, cfg.search.full),
            }
        })
        .collect();
    for r in &results {
        serde_json::to_writer(&mut *out, r)?;
        writeln!(out)?;
    }
    Ok(results)
}

#[derive(Deserialize)]
struct PredictionLine {
    y_true: i64,
    y_pred: i64,
}

/// Reads `{"y_true": .., "y_pred": ..}` lines with labels in
/// `first_label .. first_label + num_classes`.
pub fn read_predictions(path: &Path, cfg: &RunConfig) -> Result<Vec<LabelPair>> {
    let file =
        std::fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let first = cfg.eval.first_label;
    let k = cfg.eval.num_classes as i64;
    let mut pairs = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line_no = n + 1;
        let line = line.with_context(|| format!("{} line {line_no}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionLine = serde_json::from_str(&line)
            .with_context(|| format!("{} line {line_no}: malformed prediction", path.display()))?;
        let index = |label: i64, field: &str| -> Result<usize> {
            let idx = label - first;
            if !(0..k).contains(&idx) {
                bail!(
                    "{} line {line_no}: {field} = {label} outside {first}..={}",
                    path.display(),
                    first + k - 1
                );
            }
            Ok(idx as usize)
        };
        let y_true = index(p.y_true, "y_true")?;
        let y_pred = index(p.y_pred, "y_pred")?;
        pairs.push(LabelPair { y_true, y_pred });
    }
    if pairs.is_empty() {
        bail!("{}: no predictions", path.display());
    }
    Ok(pairs)
}

/// Computes metrics for a predictions file and writes `metrics.json`,
/// `confusion.csv` and `confusion_normalized.csv` into `eval_dir`.
pub fn eval(cfg: &RunConfig, predictions: &Path, out: &mut dyn Write) -> Result<MetricsReport> {
    let pairs = read_predictions(predictions, cfg)?;
    let cm = confusion_counts(&pairs, cfg.eval.num_classes)?;
    let labels: Vec<String> = (0..cfg.eval.num_classes as i64)
        .map(|i| (cfg.eval.first_label + i).to_string())
        .collect();
    let report = MetricsReport::from_confusion(&cm, &labels)?;
    let degenerate: Vec<&str> = report
        .classes
        .iter()
        .filter(|c| c.degenerate)
        .map(|c| c.label.as_str())
        .collect();
    if !degenerate.is_empty() {
        eprintln!(
            "note: classes {} have no support or no predictions; their 0/0 ratios are reported as 0",
            degenerate.join(", ")
        );
    }

    let dir = &cfg.paths.eval_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = serde_json::to_vec_pretty(&report)?;
    let files = [
        ("metrics.json", json),
        ("confusion.csv", cm.to_csv(&labels).into_bytes()),
        ("confusion_normalized.csv", cm.to_normalized_csv(&labels).into_bytes()),
    ];
    for (name, bytes) in files {
        hsearch_core::io::write_atomic(&dir.join(name), |w| w.write_all(&bytes))?;
    }
    serde_json::to_writer(
        &mut *out,
        &json!({
            "accuracy": report.accuracy,
            "weighted_f1": report.weighted_f1,
            "total": report.total,
        }),
    )?;
    writeln!(out)?;
    Ok(report)
}
