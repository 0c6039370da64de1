//! Review records, star-class resampling and train/validation/test splits.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

pub const STAR_CLASSES: std::ops::RangeInclusive<u8> = 1..=5;

/// One review. `record_id` is the zero-based line number in the source file
/// and is what identifies a record, since texts may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub record_id: usize,
    pub text: String,
    pub stars: u8,
    pub business_id: String,
}

#[derive(Deserialize)]
struct RawReview {
    text: String,
    stars: serde_json::Number,
    business_id: String,
}

/// Accepts integral stars in 1..=5, written either as `5` or `5.0`.
fn parse_stars(n: &serde_json::Number) -> Option<u8> {
    let v = n.as_u64().or_else(|| {
        n.as_f64()
            .filter(|f| f.fract() == 0.0 && *f >= 0.0)
            .map(|f| f as u64)
    })?;
    u8::try_from(v).ok().filter(|s| STAR_CLASSES.contains(s))
}

fn parse_review(line: &str, record_id: usize) -> Option<Review> {
    let raw: RawReview = serde_json::from_str(line).ok()?;
    Some(Review {
        record_id,
        stars: parse_stars(&raw.stars)?,
        text: raw.text,
        business_id: raw.business_id,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub reviews: Vec<Review>,
    pub total_lines: usize,
    /// Zero-based line numbers of lines that failed to parse or validate.
    pub skipped_lines: Vec<usize>,
}

impl LoadReport {
    pub fn skipped(&self) -> usize {
        self.skipped_lines.len()
    }
}

/// Reads JSON-lines reviews. Malformed lines (bad JSON, missing fields, stars
/// outside 1..=5, invalid UTF-8, blank) are skipped and recorded.
pub fn load_reviews(path: &Path) -> Result<LoadReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut report = LoadReport::default();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        let line_no = report.total_lines;
        report.total_lines += 1;
        let parsed = std::str::from_utf8(&buf)
            .ok()
            .and_then(|s| parse_review(s.trim_end_matches(['\n', '\r']), line_no));
        match parsed {
            Some(r) => report.reviews.push(r),
            None => report.skipped_lines.push(line_no),
        }
    }
    Ok(report)
}

/// Keeps reviews whose business id is in `allowed`, preserving order.
pub fn filter_by_business(reviews: &[Review], allowed: &HashSet<String>) -> Vec<Review> {
    reviews
        .iter()
        .filter(|r| allowed.contains(&r.business_id))
        .cloned()
        .collect()
}

/// Share of reviews per star value.
pub fn class_distribution(reviews: &[Review]) -> Result<BTreeMap<u8, f64>> {
    if reviews.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    for r in reviews {
        *counts.entry(r.stars).or_default() += 1;
    }
    let n = reviews.len() as f64;
    Ok(counts.into_iter().map(|(s, c)| (s, c as f64 / n)).collect())
}

/// Draws exactly `per_class` reviews of every star value without replacement.
pub fn balanced_resample(reviews: &[Review], per_class: usize, seed: u64) -> Result<Vec<Review>> {
    let mut by_class: BTreeMap<u8, Vec<&Review>> =
        STAR_CLASSES.map(|s| (s, Vec::new())).collect();
    for r in reviews {
        by_class.entry(r.stars).or_default().push(r);
    }
    if let Some((&stars, members)) = by_class.iter().find(|(_, m)| m.len() < per_class) {
        return Err(Error::InsufficientClass {
            stars,
            available: members.len(),
            required: per_class,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = Vec::with_capacity(per_class * by_class.len());
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        sample.extend(members.iter().take(per_class).map(|r| (*r).clone()));
    }
    sample.shuffle(&mut rng);
    Ok(sample)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_pct: u32,
    pub val_pct: u32,
    pub test_pct: u32,
    /// When set, the training split is rebalanced to this many reviews per
    /// star class after splitting.
    pub train_per_class: Option<usize>,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_pct: 70,
            val_pct: 15,
            test_pct: 15,
            train_per_class: None,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train_pct, self.val_pct, self.test_pct];
        if parts.contains(&0) || parts.iter().sum::<u32>() != 100 {
            return Err(Error::InvalidConfig(format!(
                "split proportions must be positive and sum to 100, got {}/{}/{}",
                self.train_pct, self.val_pct, self.test_pct
            )));
        }
        if self.train_per_class == Some(0) {
            return Err(Error::InvalidConfig("train_per_class must be positive".into()));
        }
        Ok(())
    }

    /// `(train, validation, test)` sizes for `n` records: validation and test
    /// are floored, the remainder goes to training.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let val = n * self.val_pct as usize / 100;
        let test = n * self.test_pct as usize / 100;
        (n - val - test, val, test)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetBundle {
    pub train: Vec<Review>,
    pub validation: Vec<Review>,
    pub test: Vec<Review>,
}

/// Names used for split files and the `split` field of written records.
pub const SPLIT_NAMES: [&str; 3] = ["train", "validation", "test"];

#[derive(Serialize, Deserialize)]
struct SplitRecord<'a> {
    record_id: usize,
    text: std::borrow::Cow<'a, str>,
    stars: u8,
    business_id: std::borrow::Cow<'a, str>,
    split: std::borrow::Cow<'a, str>,
}

/// Seeded shuffle followed by a 3-way cut. Validation and test keep the
/// natural class mix; see [`DatasetBundle::balance_train`].
pub fn split(reviews: &[Review], spec: &SplitSpec) -> Result<DatasetBundle> {
    spec.validate()?;
    if reviews.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut shuffled = reviews.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let (n_train, n_val, _) = spec.sizes(shuffled.len());
    let test = shuffled.split_off(n_train + n_val);
    let validation = shuffled.split_off(n_train);
    Ok(DatasetBundle {
        train: shuffled,
        validation,
        test,
    })
}

impl DatasetBundle {
    pub fn splits(&self) -> [(&'static str, &[Review]); 3] {
        [
            (SPLIT_NAMES[0], &self.train),
            (SPLIT_NAMES[1], &self.validation),
            (SPLIT_NAMES[2], &self.test),
        ]
    }

    /// Replaces the training split with a class-balanced resample of itself.
    pub fn balance_train(&mut self, per_class: usize, seed: u64) -> Result<()> {
        self.train = balanced_resample(&self.train, per_class, seed)?;
        Ok(())
    }

    /// Writes `train.jsonl`, `validation.jsonl` and `test.jsonl` into `dir`.
    pub fn write_jsonl(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, records) in self.splits() {
            write_split(&dir.join(format!("{name}.jsonl")), name, records)?;
        }
        Ok(())
    }
}

fn write_split(path: &Path, name: &str, records: &[Review]) -> Result<()> {
    let lines = records
        .iter()
        .map(|r| {
            serde_json::to_string(&SplitRecord {
                record_id: r.record_id,
                text: r.text.as_str().into(),
                stars: r.stars,
                business_id: r.business_id.as_str().into(),
                split: name.into(),
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    io::write_atomic(path, |w| {
        for line in &lines {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

/// Reads a split file written by [`DatasetBundle::write_jsonl`].
pub fn read_split(path: &Path) -> Result<Vec<Review>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SplitRecord =
            serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?;
        out.push(Review {
            record_id: rec.record_id,
            text: rec.text.into_owned(),
            stars: rec.stars,
            business_id: rec.business_id.into_owned(),
        });
    }
    Ok(out)
}
