//! Lexical + vector score fusion.
//!
//! Each side contributes its top `candidate_multiplier · k` hits. Both score
//! lists are min-max scaled to `[0, 1]` (a list whose scores are all equal maps
//! to ones), and a document's fused score is
//! `alpha · lexical + (1 - alpha) · vector`, with a side that did not return
//! the document contributing zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoder::DenseEmbedding;
use crate::error::{Error, Result};
use crate::hits::{top_k, SearchHit};
use crate::lexical::InvertedIndex;
use crate::vector::VectorIndex;

pub const DEFAULT_CANDIDATE_MULTIPLIER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    /// Weight of the lexical side, in `[0, 1]`.
    pub alpha: f64,
    pub k: usize,
    #[serde(default = "default_multiplier")]
    pub candidate_multiplier: usize,
}

fn default_multiplier() -> usize {
    DEFAULT_CANDIDATE_MULTIPLIER
}

impl HybridConfig {
    pub fn new(alpha: f64, k: usize) -> Self {
        Self {
            alpha,
            k,
            candidate_multiplier: DEFAULT_CANDIDATE_MULTIPLIER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.k == 0 || self.candidate_multiplier == 0 {
            return Err(Error::InvalidConfig(
                "k and candidate_multiplier must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of candidates pulled from each side.
    pub fn pool_size(&self) -> usize {
        self.k.saturating_mul(self.candidate_multiplier)
    }
}

/// Min-max scales scores to `[0, 1]`; constant lists become all ones.
pub fn min_max_normalize(hits: &[SearchHit]) -> Vec<SearchHit> {
    let (lo, hi) = hits.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| {
        (lo.min(h.score), hi.max(h.score))
    });
    let span = hi - lo;
    hits.iter()
        .map(|h| SearchHit {
            doc_id: h.doc_id,
            score: if span > 0.0 { (h.score - lo) / span } else { 1.0 },
        })
        .collect()
}

/// Fuses two candidate lists and returns the best `k`.
pub fn fuse(lexical: &[SearchHit], vector: &[SearchHit], alpha: f64, k: usize) -> Vec<SearchHit> {
    let mut parts: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for h in min_max_normalize(lexical) {
        parts.entry(h.doc_id).or_default().0 = h.score;
    }
    for h in min_max_normalize(vector) {
        parts.entry(h.doc_id).or_default().1 = h.score;
    }
    let fused = parts
        .into_iter()
        .map(|(doc_id, (lex, vec))| SearchHit {
            doc_id,
            score: (alpha * lex + (1.0 - alpha) * vec).clamp(0.0, 1.0),
        })
        .collect();
    top_k(fused, k)
}

/// Hybrid search over two indexes sharing one doc-id space.
pub fn search_hybrid<S: AsRef<str>>(
    lexical: &InvertedIndex,
    vectors: &VectorIndex,
    query_tokens: &[S],
    query_embedding: &DenseEmbedding,
    cfg: &HybridConfig,
) -> Result<Vec<SearchHit>> {
    cfg.validate()?;
    let pool = cfg.pool_size();
    let lex = lexical.search(query_tokens, pool);
    let vec = vectors.search(query_embedding, pool)?;
    Ok(fuse(&lex, &vec, cfg.alpha, cfg.k))
}
