//! Deterministic synthetic review corpora for demos and tests.

use std::io::Write;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const ONSETS: &[&str] = &["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: &[&str] = &["", "n", "r", "s", "t", "l", "sh"];

const SENTIMENT: [&[&str]; 5] = [
    &["awful", "terrible", "rude", "cold", "never", "worst", "disgusting"],
    &["bland", "slow", "overpriced", "meh", "disappointing", "soggy"],
    &["okay", "average", "decent", "fine", "mixed", "alright"],
    &["good", "tasty", "friendly", "fresh", "solid", "recommend"],
    &["amazing", "delicious", "yummy", "perfect", "wow", "outstanding", "best"],
];

/// Rough star mix of public restaurant review data: skewed toward 4 and 5.
const STAR_WEIGHTS: [f64; 5] = [0.14, 0.08, 0.10, 0.22, 0.46];

fn word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(1..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(VOWELS.choose(rng).unwrap());
        w.push_str(CODAS.choose(rng).unwrap());
    }
    w
}

/// Writes `n` reviews as JSON lines. The same `(n, seed)` always yields the
/// same bytes.
pub fn write_corpus(out: &mut dyn Write, n: usize, seed: u64) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon: Vec<String> = (0..3000).map(|_| word(&mut rng)).collect();
    // Zipf-like popularity over the lexicon
    let popularity = WeightedIndex::new((1..=lexicon.len()).map(|r| 1.0 / r as f64)).unwrap();
    let stars = WeightedIndex::new(STAR_WEIGHTS).unwrap();
    for _ in 0..n {
        let star = stars.sample(&mut rng);
        let len = rng.gen_range(8..=40);
        let mut words: Vec<&str> = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.gen_bool(0.15) {
                words.push(SENTIMENT[star].choose(&mut rng).unwrap());
            } else {
                words.push(&lexicon[popularity.sample(&mut rng)]);
            }
        }
        let mut text = words.join(" ");
        if let Some(first) = text.get(..1) {
            text.replace_range(..1, &first.to_uppercase());
        }
        text.push('.');
        let line = json!({
            "text": text,
            "stars": star + 1,
            "business_id": format!("biz{:03}", rng.gen_range(0..200)),
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}
