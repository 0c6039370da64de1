//! Acceptance checks, one test per criterion. Each prints a single
//! `PASS`/`FAIL` line to stderr (bypassing output capture) before asserting.

mod oracles;

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use hsearch_cli::commands::{self, run_query};
use hsearch_cli::store::{encoder_ids, IndexBundle};
use hsearch_cli::{synth, RunConfig, SearchMode};
use hsearch_core::encoder::{cross_entropy, mse, rmsnorm};
use hsearch_core::hybrid::min_max_normalize;
use hsearch_core::eval::LabelPair;
use hsearch_core::{
    balanced_resample, build_index, build_vocabulary, confusion_counts, search_hybrid, split,
    tfidf_vectorize, tokenize, DenseEmbedding, Encoder, EncoderConfig, HybridConfig,
    InvertedIndex, Review, SearchHit, SplitSpec, TokenizerConfig, VectorIndex,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Serializes the timed and CPU-heavy criteria so they don't share the machine.
fn heavy() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, name: &str, failures: &[String]) {
    let line = match failures.first() {
        None => format!("criterion {n:>2} PASS  {name}"),
        Some(first) => format!(
            "criterion {n:>2} FAIL  {name}: {first} ({} failure(s))",
            failures.len()
        ),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(failures.is_empty(), "criterion {n}: {failures:#?}");
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------- 1

#[test]
fn c01_tfidf_matches_double_loop() {
    let _g = heavy();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut failures = Vec::new();
    for corpus_no in 0..20 {
        let n_docs = rng.gen_range(1..=100);
        let n_terms = rng.gen_range(1..=50);
        let corpus: Vec<Vec<String>> = (0..n_docs)
            .map(|_| {
                (0..rng.gen_range(1..=30))
                    .map(|_| format!("t{}", rng.gen_range(0..n_terms)))
                    .collect()
            })
            .collect();
        let vocab = build_vocabulary(&corpus);
        for (d, doc) in corpus.iter().enumerate() {
            let expected = oracles::tfidf(&corpus, doc);
            let got: BTreeMap<String, f64> = tfidf_vectorize(doc, &vocab)
                .entries()
                .iter()
                .map(|&(id, w)| (vocab.term(id).unwrap().to_owned(), w))
                .collect();
            let keys: Vec<_> = got.keys().collect();
            if keys != expected.keys().collect::<Vec<_>>() {
                failures.push(format!("corpus {corpus_no} doc {d}: support differs"));
                continue;
            }
            for (term, w) in &expected {
                if !close(got[term], *w, 1e-12) {
                    failures.push(format!("corpus {corpus_no} doc {d} {term}: {} vs {w}", got[term]));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(5) {
        failures.push(format!("took {elapsed:?}, limit 5s"));
    }
    report(1, "tf-idf equals double-loop reference (20 corpora, 1e-12, <5s)", &failures);
}

// ---------------------------------------------------------------- 2

fn rms_of(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

#[test]
fn c02_rmsnorm_unit_rms_and_scale_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut failures = Vec::new();
    for i in 0..1000 {
        let dim = rng.gen_range(2..=512);
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let (g, b) = (vec![1.0; dim], vec![0.0; dim]);
        let base = rmsnorm(&a, &g, &b, 0.0).unwrap();
        let r = rms_of(&base);
        if !close(r, 1.0, 1e-9) {
            failures.push(format!("vector {i} (dim {dim}): rms {r}"));
        }
        for c in [0.01, 1.0, 100.0] {
            let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
            let out = rmsnorm(&scaled, &g, &b, 0.0).unwrap();
            if let Some(j) = (0..dim).find(|&j| !close(out[j], base[j], 1e-9)) {
                failures.push(format!("vector {i} c={c}: element {j} {} vs {}", out[j], base[j]));
            }
        }
    }
    let hand = rmsnorm(&[3.0, 4.0], &[1.0, 1.0], &[0.0, 0.0], 0.0).unwrap();
    if !close(hand[0], 0.848528, 1e-6) || !close(hand[1], 1.131371, 1e-6) {
        failures.push(format!("(3, 4) -> {hand:?}"));
    }
    report(2, "RMSNorm unit RMS, scale invariance, hand value", &failures);
}

// ---------------------------------------------------------------- 3

#[test]
fn c03_attention_rows_are_distributions() {
    let _g = heavy();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut failures = Vec::new();
    for i in 0..100 {
        let cfg = EncoderConfig {
            vocab_size: 200,
            d_model: 32,
            n_heads: 4,
            n_layers: 2,
            d_ff: 64,
            max_seq_len: 128,
            seed: rng.gen(),
        };
        let encoder = Encoder::from_seed(cfg).unwrap();
        let len = if i == 0 { 1 } else { rng.gen_range(1..=64) };
        let ids: Vec<u32> = (0..len).map(|_| rng.gen_range(0..200)).collect();
        for (l, heads) in encoder.attention_maps(&ids).unwrap().iter().enumerate() {
            for (h, w) in heads.iter().enumerate() {
                for (r, row) in w.iter_rows().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if !close(sum, 1.0, 1e-9) || row.iter().any(|&x| x < 0.0) {
                        failures.push(format!("input {i} layer {l} head {h} row {r}: sum {sum}"));
                    }
                    if len == 1 && row[0] != 1.0 {
                        failures.push(format!("input {i}: single-token weight {}", row[0]));
                    }
                }
            }
        }
    }
    report(3, "attention rows sum to 1, non-negative, seq_len 1 gives 1.0", &failures);
}

// ---------------------------------------------------------------- 4

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}

fn numeric_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let (mut plus, mut minus) = (x.to_vec(), x.to_vec());
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn c04_loss_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let h = 1e-5;
    let mut failures = Vec::new();
    for i in 0..100 {
        let k = rng.gen_range(2..=10);
        let logits: Vec<f64> = (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let label = rng.gen_range(0..k);
        let (_, grad) = cross_entropy(&logits, label).unwrap();
        let numeric = numeric_gradient(|z| cross_entropy(z, label).unwrap().0, &logits, h);
        let err = relative_error(&grad, &numeric);
        if err > 1e-5 {
            failures.push(format!("cross-entropy instance {i}: relative error {err:e}"));
        }
    }
    for i in 0..100 {
        let n = rng.gen_range(1..=20);
        let pred: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let target: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let (_, grad) = mse(&pred, &target).unwrap();
        let numeric = numeric_gradient(|p| mse(p, &target).unwrap().0, &pred, h);
        let err = relative_error(&grad, &numeric);
        if err > 1e-5 {
            failures.push(format!("mse instance {i}: relative error {err:e}"));
        }
    }
    let (uniform, _) = cross_entropy(&[0.7; 5], 2).unwrap();
    if !close(uniform, 5f64.ln(), 1e-9) {
        failures.push(format!("uniform K=5 loss {uniform}"));
    }
    report(4, "cross-entropy and MSE gradients (h=1e-5, rel err <= 1e-5)", &failures);
}

// ---------------------------------------------------------------- 5

fn pipeline_config(root: &Path, seed: u64) -> RunConfig {
    let mut cfg = RunConfig { seed, ..RunConfig::default() };
    cfg.paths.corpus = root.join("reviews.jsonl");
    cfg.paths.data_dir = root.join("data");
    cfg.paths.index_dir = root.join("index");
    cfg.paths.eval_dir = root.join("eval");
    cfg
}

#[test]
fn c05_every_document_retrieves_itself() {
    let _g = heavy();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = pipeline_config(dir.path(), 55);
    let mut corpus = Vec::new();
    synth::write_corpus(&mut corpus, 200, 55).unwrap();
    std::fs::write(&cfg.paths.corpus, corpus).unwrap();
    let mut sink = Vec::new();
    commands::ingest(&cfg, &mut sink).unwrap();
    commands::index(&cfg, &mut sink).unwrap();
    let bundle = IndexBundle::load(&cfg.paths.index_dir).unwrap();
    cfg.search.alpha = 0.5;
    cfg.search.k = 5;

    let mut failures = Vec::new();
    let mut hits_per_mode = BTreeMap::new();
    for mode in [SearchMode::Lexical, SearchMode::Vector, SearchMode::Hybrid] {
        let mut found = 0;
        for doc in &bundle.docs {
            let hits = run_query(&bundle, &doc.text, mode, &cfg).unwrap();
            match hits.first() {
                Some(top) if top.doc_id == doc.doc_id => found += 1,
                other => failures.push(format!(
                    "{mode:?} doc {}: top hit {:?}",
                    doc.doc_id,
                    other.map(|h| h.doc_id)
                )),
            }
        }
        hits_per_mode.insert(format!("{mode:?}"), found);
    }
    if bundle.docs.len() != 200 {
        failures.push(format!("indexed {} docs", bundle.docs.len()));
    }
    report(5, &format!("self-retrieval top-1 {hits_per_mode:?} of 200"), &failures);
}

// ---------------------------------------------------------------- 6, 7

/// 1000 synthetic documents indexed both ways, shared by criteria 6 and 7.
struct Fixture {
    tokens: Vec<Vec<String>>,
    lexical: InvertedIndex,
    encoder: Encoder,
    vectors: VectorIndex,
    stored: Vec<(u32, Vec<f64>)>,
}

impl Fixture {
    fn get() -> &'static Fixture {
        static FIXTURE: OnceLock<Fixture> = OnceLock::new();
        FIXTURE.get_or_init(|| {
            let mut raw = Vec::new();
            synth::write_corpus(&mut raw, 1000, 66).unwrap();
            let tcfg = TokenizerConfig::default();
            let tokens: Vec<Vec<String>> = String::from_utf8(raw)
                .unwrap()
                .lines()
                .map(|l| {
                    let v: serde_json::Value = serde_json::from_str(l).unwrap();
                    tokenize(v["text"].as_str().unwrap(), &tcfg)
                })
                .collect();
            let lexical = build_index(&tokens);
            let encoder = Encoder::from_seed(EncoderConfig {
                vocab_size: lexical.num_terms() + 1,
                d_model: 64,
                n_heads: 4,
                n_layers: 2,
                d_ff: 128,
                max_seq_len: 128,
                seed: 66,
            })
            .unwrap();
            let mut vectors = VectorIndex::new(64);
            let mut stored = Vec::new();
            for (i, t) in tokens.iter().enumerate() {
                let e = encoder.encode(&encoder_ids(t, &lexical, 128)).unwrap();
                vectors.add_vector(i as u32, &e).unwrap();
                stored.push((i as u32, e.0));
            }
            Fixture { tokens, lexical, encoder, vectors, stored }
        })
    }

    /// A few tokens drawn from a random document, sometimes with an unseen word.
    fn query(&self, rng: &mut ChaCha8Rng) -> Vec<String> {
        let doc = self.tokens.choose(rng).unwrap();
        let n = rng.gen_range(1..=5);
        let mut q: Vec<String> = doc.choose_multiple(rng, n).cloned().collect();
        if rng.gen_bool(0.2) {
            q.push("qqqunseen".into());
        }
        q
    }

    fn embed(&self, q: &[String]) -> DenseEmbedding {
        self.encoder.encode(&encoder_ids(q, &self.lexical, 128)).unwrap()
    }
}

fn compare_hits(label: &str, got: &[SearchHit], want: &[SearchHit], failures: &mut Vec<String>) {
    let ids = |h: &[SearchHit]| h.iter().map(|x| x.doc_id).collect::<Vec<_>>();
    if ids(got) != ids(want) {
        failures.push(format!("{label}: ids {:?} vs {:?}", ids(got), ids(want)));
        return;
    }
    for (g, w) in got.iter().zip(want) {
        if !close(g.score, w.score, 1e-9) {
            failures.push(format!("{label}: doc {} score {} vs {}", g.doc_id, g.score, w.score));
        }
    }
}

#[test]
fn c06_search_equals_brute_force() {
    let _g = heavy();
    let fx = Fixture::get();
    let oracle = oracles::LexicalOracle::new(&fx.tokens);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut failures = Vec::new();
    for i in 0..50 {
        let q = fx.query(&mut rng);
        let k = rng.gen_range(1..=20);
        compare_hits(&format!("lexical query {i}"), &fx.lexical.search(&q, k), &oracle.search(&q, k), &mut failures);
        let e = fx.embed(&q);
        let got = fx.vectors.search(&e, k).unwrap();
        compare_hits(&format!("vector query {i}"), &got, &oracles::vector_search(&fx.stored, e.values(), k), &mut failures);
    }
    report(6, "lexical and vector search equal brute force (50 queries, 1e-9)", &failures);
}

#[test]
fn c07_hybrid_degenerates_to_single_modality() {
    let _g = heavy();
    let fx = Fixture::get();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut failures = Vec::new();
    for i in 0..50 {
        let q = fx.query(&mut rng);
        let e = fx.embed(&q);
        for alpha in [1.0, 0.0] {
            let cfg = HybridConfig::new(alpha, 10);
            let pool = cfg.pool_size();
            let reference = if alpha == 1.0 {
                fx.lexical.search(&q, pool)
            } else {
                fx.vectors.search(&e, pool).unwrap()
            };
            let candidates: HashSet<u32> = reference.iter().map(|h| h.doc_id).collect();
            let fused: Vec<u32> = search_hybrid(&fx.lexical, &fx.vectors, &q, &e, &cfg)
                .unwrap()
                .iter()
                .map(|h| h.doc_id)
                .filter(|id| candidates.contains(id))
                .collect();
            let expected: Vec<u32> = reference.iter().take(fused.len()).map(|h| h.doc_id).collect();
            // candidates scaled to 0 tie with the other modality's docs, so
            // only those with a positive scaled score are guaranteed a slot
            let positive = min_max_normalize(&reference).iter().filter(|h| h.score > 0.0).count();
            if fused != expected || fused.len() < positive.min(10) {
                failures.push(format!("query {i} alpha {alpha}: {fused:?} vs {expected:?}"));
            }
        }
    }
    report(7, "hybrid with alpha 1 / 0 follows lexical / vector order (50 queries)", &failures);
}

// ---------------------------------------------------------------- 8

#[test]
fn c08_metrics_match_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut failures = Vec::new();
    for k in [2usize, 3, 5] {
        for i in 0..1000 {
            let n = rng.gen_range(1..=200);
            let pairs: Vec<LabelPair> = (0..n)
                .map(|_| LabelPair::new(rng.gen_range(0..k), rng.gen_range(0..k)))
                .collect();
            let cm = confusion_counts(&pairs, k).unwrap();
            let (acc, wf1) = oracles::metrics(&pairs, k);
            let (got_acc, got_wf1) = (cm.accuracy().unwrap(), cm.weighted_f1().unwrap());
            if !close(got_acc, acc, 1e-12) || !close(got_wf1, wf1, 1e-12) {
                failures.push(format!("K={k} set {i}: ({got_acc}, {got_wf1}) vs ({acc}, {wf1})"));
            }
        }
    }
    let hand = [(0, 0), (0, 1), (1, 1), (1, 1)].map(|(t, p)| LabelPair::new(t, p));
    let cm = confusion_counts(&hand, 2).unwrap();
    let (acc, wf1) = (cm.accuracy().unwrap(), cm.weighted_f1().unwrap());
    if !close(acc, 0.75, 1e-6) || !close(wf1, 0.733333, 1e-6) {
        failures.push(format!("hand case: accuracy {acc}, weighted F1 {wf1}"));
    }
    report(8, "accuracy and weighted F1 (3000 label sets, 1e-12; hand case)", &failures);
}

// ---------------------------------------------------------------- 9

fn reviews(n: usize, star_of: impl Fn(usize) -> u8) -> Vec<Review> {
    (0..n)
        .map(|i| Review {
            record_id: i,
            text: format!("review {i}"),
            stars: star_of(i),
            business_id: format!("b{}", i % 7),
        })
        .collect()
}

#[test]
fn c09_split_and_resample() {
    let mut failures = Vec::new();
    let base = reviews(100, |i| (i % 5) as u8 + 1);
    let spec = SplitSpec { seed: 9, ..SplitSpec::default() };
    let bundle = split(&base, &spec).unwrap();
    let sizes = (bundle.train.len(), bundle.validation.len(), bundle.test.len());
    if sizes != (70, 15, 15) {
        failures.push(format!("split sizes {sizes:?}"));
    }
    let mut ids: Vec<usize> = bundle
        .splits()
        .iter()
        .flat_map(|(_, r)| r.iter().map(|x| x.record_id))
        .collect();
    ids.sort_unstable();
    if ids != (0..100).collect::<Vec<_>>() {
        failures.push("splits are not a disjoint cover of the input".into());
    }

    let skewed = reviews(400, |i| [1, 2, 3, 4, 4, 5, 5, 5][i % 8]);
    let sample = balanced_resample(&skewed, 20, 9).unwrap();
    let mut per_class = BTreeMap::new();
    for r in &sample {
        *per_class.entry(r.stars).or_insert(0) += 1;
    }
    if per_class.len() != 5 || per_class.values().any(|&c| c != 20) {
        failures.push(format!("resample counts {per_class:?}"));
    }
    if balanced_resample(&skewed, 20, 9).unwrap() != sample {
        failures.push("resample differs under the same seed".into());
    }

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        split(&base, &spec).unwrap().write_jsonl(d.path()).unwrap();
    }
    for name in ["train", "validation", "test"] {
        let file = format!("{name}.jsonl");
        let a = std::fs::read(dirs[0].path().join(&file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&file)).unwrap();
        if a != b {
            failures.push(format!("{file} differs between identical-seed runs"));
        }
    }
    report(9, "70/15/15 disjoint split, 20 per class, byte-identical reruns", &failures);
}

// ---------------------------------------------------------------- 10

fn hsearch(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hsearch"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("hsearch {args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

#[test]
fn c10_end_to_end_10k_documents() {
    let _g = heavy();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mut failures = Vec::new();
    let start = Instant::now();
    let steps: [&[&str]; 6] = [
        &["synth", "--n", "10000", "--out", "reviews.jsonl"],
        &["--seed", "10", "ingest"],
        &["--seed", "10", "index"],
        &["search", "delicious fresh bagels", "--mode", "lexical"],
        &["search", "delicious fresh bagels", "--mode", "vector"],
        &["search", "delicious fresh bagels", "--mode", "hybrid"],
    ];
    let mut outputs = Vec::new();
    for args in steps {
        match hsearch(root, args) {
            Ok(o) => outputs.push(o),
            Err(e) => failures.push(e),
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(60) {
        failures.push(format!("pipeline took {elapsed:?}, limit 60s"));
    }
    if failures.is_empty() && outputs[3..].iter().any(|o| o.lines().count() != 10) {
        failures.push("a search mode returned fewer than 10 results".into());
    }

    // full rerun with the same seed into a second index directory
    for args in [
        &["--seed", "10", "--data-dir", "data2", "ingest"][..],
        &["--seed", "10", "--data-dir", "data2", "--index-dir", "index2", "index"][..],
    ] {
        if let Err(e) = hsearch(root, args) {
            failures.push(e);
        }
    }
    for file in ["vectors.idx", "lexical.idx", "encoder.bin"] {
        let a = std::fs::read(root.join("index").join(file));
        let b = std::fs::read(root.join("index2").join(file));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => failures.push(format!("{file} not byte-identical across reruns")),
        }
    }
    report(
        10,
        &format!("10k-doc synth/ingest/index/search in {:.1}s, reruns byte-identical", elapsed.as_secs_f64()),
        &failures,
    );
}
