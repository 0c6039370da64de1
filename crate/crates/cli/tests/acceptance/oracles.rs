//! Exhaustive reference implementations, written independently of the
//! library's indexing and scoring paths.

use std::collections::BTreeMap;

use hsearch_core::eval::LabelPair;
use hsearch_core::SearchHit;

/// tf-idf by direct double loop over terms and documents.
pub fn tfidf(corpus: &[Vec<String>], doc: &[String]) -> BTreeMap<String, f64> {
    let n = corpus.len() as f64;
    let mut weights = BTreeMap::new();
    for term in doc {
        if weights.contains_key(term) {
            continue;
        }
        let df = corpus.iter().filter(|d| d.contains(term)).count();
        if df == 0 {
            continue;
        }
        let tf = doc.iter().filter(|t| *t == term).count() as f64;
        let w = tf * (n / (1.0 + df as f64)).ln();
        if w != 0.0 {
            weights.insert(term.clone(), w);
        }
    }
    weights
}

/// Reference ordering: descending score, ascending doc id.
pub fn sort_hits(hits: &mut [SearchHit]) {
    hits.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap().then(a.doc_id.cmp(&b.doc_id)));
}

/// Lexical ranking that materializes every document's tf-idf vector up
/// front and scores all documents by direct cosine.
pub struct LexicalOracle {
    /// Term -> first-occurrence id, used only to fix the summation order.
    ids: BTreeMap<String, usize>,
    df: BTreeMap<String, usize>,
    n: usize,
    docs: Vec<(Vec<(usize, f64)>, f64)>,
}

impl LexicalOracle {
    pub fn new(corpus: &[Vec<String>]) -> Self {
        let mut ids = BTreeMap::new();
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            let mut seen: Vec<&String> = Vec::new();
            for t in doc {
                let next = ids.len();
                ids.entry(t.clone()).or_insert(next);
                if !seen.contains(&t) {
                    seen.push(t);
                    *df.entry(t.clone()).or_default() += 1;
                }
            }
        }
        let mut oracle = Self { ids, df, n: corpus.len(), docs: Vec::new() };
        oracle.docs = corpus.iter().map(|d| oracle.vector(d)).collect();
        oracle
    }

    /// Sparse tf-idf vector (ordered by term id) and its norm.
    fn vector(&self, doc: &[String]) -> (Vec<(usize, f64)>, f64) {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(&id) = self.ids.get(t) {
                *tf.entry(id).or_default() += 1.0;
            }
        }
        let by_id: BTreeMap<usize, &String> = self.ids.iter().map(|(t, &id)| (id, t)).collect();
        let v: Vec<(usize, f64)> = tf
            .into_iter()
            .map(|(id, c)| {
                let df = self.df[by_id[&id]] as f64;
                (id, c * (self.n as f64 / (1.0 + df)).ln())
            })
            .filter(|&(_, w)| w != 0.0)
            .collect();
        let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        (v, norm)
    }

    pub fn search(&self, query: &[String], k: usize) -> Vec<SearchHit> {
        let (q, q_norm) = self.vector(query);
        let mut hits = Vec::new();
        for (doc_id, (d, d_norm)) in self.docs.iter().enumerate() {
            if q_norm == 0.0 || *d_norm == 0.0 {
                continue;
            }
            let d_map: BTreeMap<usize, f64> = d.iter().copied().collect();
            let mut dot = 0.0;
            for (id, qw) in &q {
                if let Some(dw) = d_map.get(id) {
                    dot += qw * dw;
                }
            }
            let score = dot / (q_norm * d_norm);
            if score != 0.0 {
                hits.push(SearchHit { doc_id: doc_id as u32, score });
            }
        }
        sort_hits(&mut hits);
        hits.truncate(k);
        hits
    }
}

/// Cosine against every stored vector.
pub fn vector_search(stored: &[(u32, Vec<f64>)], query: &[f64], k: usize) -> Vec<SearchHit> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut hits: Vec<SearchHit> = stored
        .iter()
        .map(|(doc_id, v)| {
            let dot: f64 = v.iter().zip(query).map(|(a, b)| a * b).sum();
            SearchHit { doc_id: *doc_id, score: dot / (norm(v) * norm(query)) }
        })
        .collect();
    sort_hits(&mut hits);
    hits.truncate(k);
    hits
}

/// Accuracy and weighted F1 recounted pair by pair for every class.
pub fn metrics(pairs: &[LabelPair], k: usize) -> (f64, f64) {
    let n = pairs.len() as f64;
    let correct = pairs.iter().filter(|p| p.y_true == p.y_pred).count() as f64;
    let mut weighted = 0.0;
    for q in 0..k {
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for p in pairs {
            match (p.y_true == q, p.y_pred == q) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fn_ += 1.0,
                (false, false) => {}
            }
        }
        let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        weighted += (tp + fn_) * f1;
    }
    (correct / n, weighted / n)
}
