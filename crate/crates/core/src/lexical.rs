//! Inverted index with tf-idf cosine ranking.
//!
//! A document's score is the cosine between the query's tf-idf vector and the
//! document's, accumulated term by term over the postings of the query terms.
//! Because idf may be negative, scores lie in `[-1, 1]`. Documents scoring
//! exactly zero are left out of the results.

use std::path::Path;

use crate::error::{Error, Result};
use crate::hits::{top_k, SearchHit};
use crate::io::{self, Reader};
use crate::text::{build_vocabulary, idf, tfidf_vectorize, Vocabulary};

const MAGIC: &[u8; 8] = b"HSLEXIDX";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: u32,
    pub term_freq: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    vocab: Vocabulary,
    /// Indexed by term id; each list sorted by doc id.
    postings: Vec<Vec<Posting>>,
    doc_norms: Vec<f64>,
}

/// Builds an index over `docs`; doc ids are positions in `docs`.
pub fn build_index<S: AsRef<str>>(docs: &[Vec<S>]) -> InvertedIndex {
    let vocab = build_vocabulary(docs);
    let mut postings: Vec<Vec<Posting>> = vec![Vec::new(); vocab.len()];
    let mut doc_norms = Vec::with_capacity(docs.len());
    let mut counts: std::collections::BTreeMap<u32, u32> = Default::default();
    for (doc_id, tokens) in docs.iter().enumerate() {
        counts.clear();
        for t in tokens {
            // every token is in the vocabulary built from these docs
            let id = vocab.id(t.as_ref()).expect("token indexed");
            *counts.entry(id).or_insert(0) += 1;
        }
        for (&term, &tf) in &counts {
            postings[term as usize].push(Posting {
                doc_id: doc_id as u32,
                term_freq: tf,
            });
        }
        doc_norms.push(tfidf_vectorize(tokens, &vocab).norm());
    }
    InvertedIndex {
        vocab,
        postings,
        doc_norms,
    }
}

impl InvertedIndex {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn num_docs(&self) -> usize {
        self.doc_norms.len()
    }

    pub fn num_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn postings(&self, term: u32) -> &[Posting] {
        self.postings.get(term as usize).map_or(&[], Vec::as_slice)
    }

    /// L2 norm of the document's tf-idf vector.
    pub fn doc_norm(&self, doc_id: u32) -> Option<f64> {
        self.doc_norms.get(doc_id as usize).copied()
    }

    /// Top-`k` documents by tf-idf cosine with the query.
    pub fn search<S: AsRef<str>>(&self, query: &[S], k: usize) -> Vec<SearchHit> {
        let q = tfidf_vectorize(query, &self.vocab);
        let q_norm = q.norm();
        if k == 0 || q_norm == 0.0 {
            return Vec::new();
        }
        let mut dots = vec![0.0; self.num_docs()];
        let mut touched = Vec::new();
        let mut seen = vec![false; self.num_docs()];
        for &(term, q_weight) in q.entries() {
            let term_idf = idf(term, &self.vocab).expect("query term from vocabulary");
            for p in &self.postings[term as usize] {
                let d = p.doc_id as usize;
                dots[d] += q_weight * (p.term_freq as f64 * term_idf);
                if !seen[d] {
                    seen[d] = true;
                    touched.push(p.doc_id);
                }
            }
        }
        let hits = touched
            .into_iter()
            .filter_map(|doc_id| {
                let d_norm = self.doc_norms[doc_id as usize];
                if d_norm == 0.0 {
                    return None;
                }
                let score = dots[doc_id as usize] / (q_norm * d_norm);
                (score != 0.0).then_some(SearchHit { doc_id, score })
            })
            .collect();
        top_k(hits, k)
    }

    /// Writes the index to `path` through a temporary file.
    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, |w| {
            io::write_header(w, MAGIC, VERSION)?;
            w.write_all(&(self.num_docs() as u64).to_le_bytes())?;
            w.write_all(&(self.num_terms() as u64).to_le_bytes())?;
            for (id, term) in self.vocab.terms().iter().enumerate() {
                io::write_str(w, term)?;
                w.write_all(&self.vocab.doc_freqs()[id].to_le_bytes())?;
                let list = &self.postings[id];
                w.write_all(&(list.len() as u64).to_le_bytes())?;
                for p in list {
                    w.write_all(&p.doc_id.to_le_bytes())?;
                    w.write_all(&p.term_freq.to_le_bytes())?;
                }
            }
            io::write_f64s(w, &self.doc_norms)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = Reader::open(path)?;
        r.header(MAGIC, VERSION)?;
        let num_docs = r.u64()?;
        let num_terms = r.u64()? as usize;
        if num_terms > r.remaining() {
            return Err(r.fail("term count larger than file"));
        }
        let mut terms = Vec::with_capacity(num_terms);
        let mut doc_freq = Vec::with_capacity(num_terms);
        let mut postings = Vec::with_capacity(num_terms);
        for _ in 0..num_terms {
            terms.push(r.string()?);
            let df = r.u64()?;
            let len = r.u64()? as usize;
            if len.saturating_mul(8) > r.remaining() {
                return Err(r.fail("postings list larger than file"));
            }
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let p = Posting {
                    doc_id: r.u32()?,
                    term_freq: r.u32()?,
                };
                if p.term_freq == 0 || p.doc_id as u64 >= num_docs {
                    return Err(r.fail("invalid posting"));
                }
                if list.last().is_some_and(|prev: &Posting| prev.doc_id >= p.doc_id) {
                    return Err(r.fail("postings not sorted by doc id"));
                }
                list.push(p);
            }
            if list.len() as u64 != df {
                return Err(r.fail("document frequency disagrees with postings"));
            }
            doc_freq.push(df);
            postings.push(list);
        }
        let doc_norms = r.f64s(num_docs as usize)?;
        r.finish()?;
        let vocab = Vocabulary::from_parts(terms, doc_freq, num_docs)
            .map_err(|e| Error::format(path, e.to_string()))?;
        Ok(Self {
            vocab,
            postings,
            doc_norms,
        })
    }
}
