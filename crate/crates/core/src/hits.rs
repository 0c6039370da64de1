use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// One ranked result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: u32,
    pub score: f64,
}

/// Descending score, then ascending doc id. `-0.0` ties with `0.0`.
pub fn rank_order(a: &SearchHit, b: &SearchHit) -> Ordering {
    let key = |s: f64| if s == 0.0 { 0.0 } else { s };
    key(b.score)
        .total_cmp(&key(a.score))
        .then(a.doc_id.cmp(&b.doc_id))
}

/// Sorts by [`rank_order`] and keeps the first `k`.
pub fn top_k(mut hits: Vec<SearchHit>, k: usize) -> Vec<SearchHit> {
    if hits.len() > k && k > 0 {
        hits.select_nth_unstable_by(k - 1, rank_order);
    }
    hits.truncate(k);
    hits.sort_by(rank_order);
    hits
}
