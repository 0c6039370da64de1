//! Tokenization, vocabularies and sparse bag-of-words vectors.
//!
//! Weighting follows the classic scheme: the tf-idf weight of term `t` in
//! document `d` is the raw count of `t` in `d` multiplied by
//! `ln(n / (1 + df(t)))`, where `n` is the number of documents and `df(t)`
//! the number of documents containing `t`. The idf is used verbatim, so it is
//! zero when `df(t) = n - 1` and negative when `t` occurs in every document.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    /// Tokens with fewer characters than this are dropped. Must be at least 1.
    pub min_token_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            min_token_len: 1,
        }
    }
}

impl TokenizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_len == 0 {
            return Err(Error::InvalidConfig("min_token_len must be >= 1".into()));
        }
        Ok(())
    }
}

/// Splits `text` into maximal runs of alphanumeric characters.
pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    // Lowercase before splitting: a few code points grow non-alphanumeric
    // combining marks when lowercased, and the split must see those.
    let lowered;
    let text = if cfg.lowercase {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|run| !run.is_empty() && run.chars().count() >= cfg.min_token_len)
        .map(str::to_owned)
        .collect()
}

/// Term dictionary with document frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, u32>,
    doc_freq: Vec<u64>,
    num_docs: u64,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its parts, checking the invariants.
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<u64>, num_docs: u64) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::LengthMismatch {
                expected: terms.len(),
                actual: doc_freq.len(),
            });
        }
        if let Some(df) = doc_freq.iter().find(|&&df| df > num_docs) {
            return Err(Error::InvalidConfig(format!(
                "document frequency {df} exceeds document count {num_docs}"
            )));
        }
        let mut ids = HashMap::with_capacity(terms.len());
        for (id, term) in terms.iter().enumerate() {
            if ids.insert(term.clone(), id as u32).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate term {term:?}")));
            }
        }
        Ok(Self {
            terms,
            ids,
            doc_freq,
            num_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of documents the vocabulary was built from (`n`).
    pub fn num_docs(&self) -> u64 {
        self.num_docs
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, id: u32) -> Option<u64> {
        self.doc_freq.get(id as usize).copied()
    }

    pub fn doc_freqs(&self) -> &[u64] {
        &self.doc_freq
    }
}

/// Assigns ids in first-occurrence order and counts document frequencies.
pub fn build_vocabulary<S: AsRef<str>>(corpus: &[Vec<S>]) -> Vocabulary {
    let mut vocab = Vocabulary::default();
    let mut last_seen: Vec<usize> = Vec::new();
    for (doc, tokens) in corpus.iter().enumerate() {
        for token in tokens {
            let token = token.as_ref();
            let id = match vocab.ids.get(token) {
                Some(&id) => id as usize,
                None => {
                    let id = vocab.terms.len();
                    vocab.ids.insert(token.to_owned(), id as u32);
                    vocab.terms.push(token.to_owned());
                    vocab.doc_freq.push(0);
                    last_seen.push(usize::MAX);
                    id
                }
            };
            if last_seen[id] != doc {
                last_seen[id] = doc;
                vocab.doc_freq[id] += 1;
            }
        }
    }
    vocab.num_docs = corpus.len() as u64;
    vocab
}

/// Sorted `(term id, weight)` pairs over a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds a vector from entries that must already be strictly ascending
    /// by term id, below `dim`, and nonzero.
    pub fn from_sorted(dim: usize, entries: Vec<(u32, f64)>) -> Result<Self> {
        for pair in entries.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(Error::InvalidConfig(
                    "sparse entries must be strictly ascending".into(),
                ));
            }
        }
        if let Some(&(id, _)) = entries.iter().find(|(id, _)| *id as usize >= dim) {
            return Err(Error::UndefinedTerm(id));
        }
        if entries.iter().any(|&(_, w)| w == 0.0) {
            return Err(Error::InvalidConfig("sparse entries must be nonzero".into()));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> f64 {
        self.entries
            .binary_search_by_key(&id, |&(t, _)| t)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Euclidean norm, summed in ascending term order.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (a, wa) = self.entries[i];
            let (b, wb) = other.entries[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

fn counts<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> BTreeMap<u32, u64> {
    let mut counts = BTreeMap::new();
    for id in tokens.iter().filter_map(|t| vocab.id(t.as_ref())) {
        *counts.entry(id).or_insert(0) += 1;
    }
    counts
}

/// Raw term counts; out-of-vocabulary tokens are ignored.
pub fn count_vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> SparseVector {
    SparseVector {
        dim: vocab.len(),
        entries: counts(tokens, vocab)
            .into_iter()
            .map(|(id, c)| (id, c as f64))
            .collect(),
    }
}

/// `ln(n / (1 + df(t)))`.
pub fn idf(term: u32, vocab: &Vocabulary) -> Result<f64> {
    let df = vocab.doc_freq(term).ok_or(Error::UndefinedTerm(term))?;
    Ok((vocab.num_docs() as f64 / (1.0 + df as f64)).ln())
}

/// Raw count times idf, dropping entries whose product is exactly zero.
pub fn tfidf_vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> SparseVector {
    let entries = counts(tokens, vocab)
        .into_iter()
        .filter_map(|(id, c)| {
            // ids come from the vocabulary itself
            let w = c as f64 * idf(id, vocab).expect("known term");
            (w != 0.0).then_some((id, w))
        })
        .collect();
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}

/// Sets every stored weight to 1.
pub fn binarize(v: &SparseVector) -> SparseVector {
    SparseVector {
        dim: v.dim,
        entries: v.entries.iter().map(|&(id, _)| (id, 1.0)).collect(),
    }
}
