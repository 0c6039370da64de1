//! Seeded workloads shared by the benchmarks.

use hsearch_core::{build_index, Encoder, EncoderConfig, InvertedIndex, VectorIndex};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Token lists with Zipf-distributed terms `w0..w{vocab}`, 8–40 tokens each.
pub fn corpus(n_docs: usize, vocab: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = WeightedIndex::new((1..=vocab).map(|r| 1.0 / r as f64)).unwrap();
    (0..n_docs)
        .map(|_| {
            let len = rng.gen_range(8..=40);
            (0..len).map(|_| format!("w{}", zipf.sample(&mut rng))).collect()
        })
        .collect()
}

/// Queries of 2–5 tokens drawn from random documents.
pub fn queries(corpus: &[Vec<String>], n: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let doc = corpus.choose(&mut rng).unwrap();
            let len = rng.gen_range(2..=5);
            doc.choose_multiple(&mut rng, len).cloned().collect()
        })
        .collect()
}

pub fn encoder(vocab_size: usize, seed: u64) -> Encoder {
    Encoder::from_seed(EncoderConfig {
        vocab_size,
        d_model: 64,
        n_heads: 4,
        n_layers: 2,
        d_ff: 128,
        max_seq_len: 128,
        seed,
    })
    .unwrap()
}

/// Encoder ids: vocabulary id + 1, 0 for unknown terms.
pub fn ids(tokens: &[String], lexical: &InvertedIndex) -> Vec<u32> {
    let vocab = lexical.vocabulary();
    let mut ids: Vec<u32> = tokens
        .iter()
        .take(128)
        .map(|t| vocab.id(t).map_or(0, |id| id + 1))
        .collect();
    if ids.is_empty() {
        ids.push(0);
    }
    ids
}

/// Both indexes over `corpus`, plus the encoder that produced the vectors.
pub fn indexes(corpus: &[Vec<String>], seed: u64) -> (InvertedIndex, VectorIndex, Encoder) {
    let lexical = build_index(corpus);
    let encoder = encoder(lexical.num_terms() + 1, seed);
    let mut vectors = VectorIndex::new(64);
    for (i, doc) in corpus.iter().enumerate() {
        let e = encoder.encode(&ids(doc, &lexical)).unwrap();
        vectors.add_vector(i as u32, &e).unwrap();
    }
    (lexical, vectors, encoder)
}
