//! On-disk layout of an index directory.
//!
//! ```text
//! index/
//!   manifest.json   counts, tokenizer settings, format version
//!   lexical.idx     inverted index
//!   vectors.idx     document embeddings
//!   encoder.bin     encoder weights (+ encoder.json sidecar)
//!   docs.jsonl      doc id -> source record, for result display
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hsearch_core::{
    tokenize, DenseEmbedding, Encoder, EncoderWeights, InvertedIndex, TokenizerConfig, VectorIndex,
};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "manifest.json";
pub const LEXICAL: &str = "lexical.idx";
pub const VECTORS: &str = "vectors.idx";
pub const WEIGHTS: &str = "encoder.bin";
pub const DOCS: &str = "docs.jsonl";

const FORMAT_VERSION: u32 = 1;

/// Encoder token id reserved for words outside the vocabulary.
pub const UNKNOWN_TOKEN: u32 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub docs: usize,
    pub terms: usize,
    pub vectors: usize,
    pub dim: usize,
    pub seed: u64,
    pub tokenizer: TokenizerConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRecord {
    pub doc_id: u32,
    pub record_id: usize,
    pub stars: u8,
    pub text: String,
}

/// Everything `search` needs, loaded together.
pub struct IndexBundle {
    pub manifest: Manifest,
    pub lexical: InvertedIndex,
    pub vectors: VectorIndex,
    pub encoder: Encoder,
    pub docs: Vec<DocRecord>,
}

/// Maps tokens to encoder ids: vocabulary id + 1, with 0 for unknown words.
/// Sequences are cut to `max_seq_len`; an empty sequence becomes `[0]`.
pub fn encoder_ids(tokens: &[String], lexical: &InvertedIndex, max_seq_len: usize) -> Vec<u32> {
    let vocab = lexical.vocabulary();
    let mut ids: Vec<u32> = tokens
        .iter()
        .take(max_seq_len)
        .map(|t| vocab.id(t).map_or(UNKNOWN_TOKEN, |id| id + 1))
        .collect();
    if ids.is_empty() {
        ids.push(UNKNOWN_TOKEN);
    }
    ids
}

impl IndexBundle {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        tokenize(text, &self.manifest.tokenizer)
    }

    pub fn embed(&self, tokens: &[String]) -> Result<DenseEmbedding> {
        let ids = encoder_ids(tokens, &self.lexical, self.encoder.config().max_seq_len);
        Ok(self.encoder.encode(&ids)?)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST);
        let manifest: Manifest = serde_json::from_slice(
            &fs::read(&manifest_path)
                .with_context(|| format!("reading {}", manifest_path.display()))?,
        )
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
        if manifest.format_version != FORMAT_VERSION {
            bail!("unsupported index format version {}", manifest.format_version);
        }
        let lexical = InvertedIndex::load(&dir.join(LEXICAL))?;
        let vectors = VectorIndex::load(&dir.join(VECTORS))?;
        let (cfg, weights) = EncoderWeights::load(&dir.join(WEIGHTS))?;
        let encoder = Encoder::new(cfg, weights)?;
        let docs = read_docs(&dir.join(DOCS))?;
        if lexical.num_docs() != docs.len() || vectors.len() != docs.len() {
            bail!(
                "index files disagree: {} lexical docs, {} vectors, {} stored docs",
                lexical.num_docs(),
                vectors.len(),
                docs.len()
            );
        }
        if vectors.dim() != encoder.config().d_model {
            bail!("vector dimension {} does not match encoder", vectors.dim());
        }
        Ok(Self {
            manifest,
            lexical,
            vectors,
            encoder,
            docs,
        })
    }

    /// Writes all files into a staging directory next to `dir` and swaps it
    /// into place, so an interrupted write leaves any previous index intact.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let parent = match dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
        let staging = tempfile::Builder::new()
            .prefix(".hsearch-index-")
            .tempdir_in(&parent)
            .context("creating staging directory")?;
        let s = staging.path();
        fs::write(s.join(MANIFEST), serde_json::to_vec_pretty(&self.manifest)?)?;
        self.lexical.save(&s.join(LEXICAL))?;
        self.vectors.save(&s.join(VECTORS))?;
        self.encoder
            .weights()
            .save(self.encoder.config(), &s.join(WEIGHTS))?;
        write_docs(&s.join(DOCS), &self.docs)?;

        let staged = staging.keep();
        if dir.exists() {
            let old = parent.join(format!(
                ".hsearch-old-{}",
                dir.file_name().map_or("index".into(), |n| n.to_string_lossy())
            ));
            if old.exists() {
                fs::remove_dir_all(&old)?;
            }
            fs::rename(dir, &old).with_context(|| format!("moving aside {}", dir.display()))?;
            fs::rename(&staged, dir)?;
            fs::remove_dir_all(&old)?;
        } else {
            fs::rename(&staged, dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(())
    }
}

fn write_docs(path: &Path, docs: &[DocRecord]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    for d in docs {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn read_docs(path: &Path) -> Result<Vec<DocRecord>> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut docs = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let doc: DocRecord = serde_json::from_str(&line?)
            .with_context(|| format!("{} line {}", path.display(), n + 1))?;
        if doc.doc_id as usize != docs.len() {
            bail!("{}: doc ids must be dense and ordered", path.display());
        }
        docs.push(doc);
    }
    Ok(docs)
}
