//! Run configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hsearch_core::dataset::SplitSpec;
use hsearch_core::hybrid::DEFAULT_CANDIDATE_MULTIPLIER;
use hsearch_core::TokenizerConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Lexical,
    Vector,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw review JSON-lines consumed by `ingest`.
    pub corpus: PathBuf,
    /// Split files and the ingest report.
    pub data_dir: PathBuf,
    pub index_dir: PathBuf,
    /// Metrics output of `eval`.
    pub eval_dir: PathBuf,
    /// Optional file of allowed business ids, one per line.
    pub business_ids: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            corpus: "reviews.jsonl".into(),
            data_dir: "data".into(),
            index_dir: "index".into(),
            eval_dir: "eval".into(),
            business_ids: None,
        }
    }
}

/// Encoder shape; vocabulary size and seed are filled in at index time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderSettings {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub max_seq_len: usize,
    /// Documents embedded per work item during indexing.
    pub batch_size: usize,
}

impl Default for EncoderSettings {
    fn default() -> Self {
        Self {
            d_model: 64,
            n_heads: 4,
            n_layers: 2,
            d_ff: 128,
            max_seq_len: 128,
            batch_size: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub mode: SearchMode,
    pub alpha: f64,
    pub k: usize,
    pub candidate_multiplier: usize,
    pub full: bool,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            mode: SearchMode::Hybrid,
            alpha: 0.5,
            k: 10,
            candidate_multiplier: DEFAULT_CANDIDATE_MULTIPLIER,
            full: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub train_pct: u32,
    pub val_pct: u32,
    pub test_pct: u32,
    pub train_per_class: Option<usize>,
}

impl Default for SplitSettings {
    fn default() -> Self {
        let d = SplitSpec::default();
        Self {
            train_pct: d.train_pct,
            val_pct: d.val_pct,
            test_pct: d.test_pct,
            train_per_class: d.train_per_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub num_classes: usize,
    /// Label value of the first class; star ratings start at 1.
    pub first_label: i64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            num_classes: 5,
            first_label: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub tokenizer: TokenizerConfig,
    pub encoder: EncoderSettings,
    pub split: SplitSettings,
    pub search: SearchSettings,
    pub eval: EvalSettings,
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<SearchMode>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub full: bool,
    pub corpus: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub index_dir: Option<PathBuf>,
    pub eval_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Loads `path` if given, otherwise defaults, then applies `overrides`
    /// and validates the result.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(mode) = o.mode {
            self.search.mode = mode;
        }
        if let Some(alpha) = o.alpha {
            self.search.alpha = alpha;
        }
        if let Some(k) = o.k {
            self.search.k = k;
        }
        self.search.full |= o.full;
        let paths = [
            (&o.corpus, &mut self.paths.corpus),
            (&o.data_dir, &mut self.paths.data_dir),
            (&o.index_dir, &mut self.paths.index_dir),
            (&o.eval_dir, &mut self.paths.eval_dir),
        ];
        for (flag, slot) in paths {
            if let Some(p) = flag {
                *slot = p.clone();
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tokenizer.validate()?;
        self.split_spec().validate()?;
        self.hybrid().validate()?;
        let e = &self.encoder;
        if e.batch_size == 0 {
            bail!("encoder.batch_size must be positive");
        }
        // vocab_size is only known at index time; any positive value checks the rest
        self.encoder_config(1).validate()?;
        if self.eval.num_classes < 2 {
            bail!("eval.num_classes must be at least 2");
        }
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_pct: self.split.train_pct,
            val_pct: self.split.val_pct,
            test_pct: self.split.test_pct,
            train_per_class: self.split.train_per_class,
            seed: self.seed,
        }
    }

    pub fn hybrid(&self) -> hsearch_core::HybridConfig {
        hsearch_core::HybridConfig {
            alpha: self.search.alpha,
            k: self.search.k,
            candidate_multiplier: self.search.candidate_multiplier,
        }
    }

    pub fn encoder_config(&self, vocab_size: usize) -> hsearch_core::EncoderConfig {
        let e = &self.encoder;
        hsearch_core::EncoderConfig {
            vocab_size,
            d_model: e.d_model,
            n_heads: e.n_heads,
            n_layers: e.n_layers,
            d_ff: e.d_ff,
            max_seq_len: e.max_seq_len,
            seed: self.seed,
        }
    }
}
