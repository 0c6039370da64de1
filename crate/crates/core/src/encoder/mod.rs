//! Inference-only transformer encoder producing dense document embeddings.
//!
//! Each block uses the pre-norm layout: the RMSNorm sits in front of the
//! attention and feed-forward sublayers and the residual is added after them,
//!
//! ```text
//! x = x + Attention(RMSNorm(x))
//! x = x + SwiGLU(RMSNorm(x))
//! ```
//!
//! Token embeddings are summed with a sinusoidal position signal before the
//! first block. After the last block a final RMSNorm is applied per position,
//! the positions are mean-pooled and the result is scaled to unit length.
//! Weights come from a seeded initializer; there is no training loop.

mod attention;
mod ffn;
mod loss;
mod norm;
mod positional;
mod tensor;
mod weights;

pub use attention::{self_attention, softmax, Attention};
pub use ffn::{swiglu_ffn, swish};
pub use loss::{cross_entropy, mse};
pub use norm::{rms, rmsnorm, RmsNormParams, RMSNORM_EPS};
pub use positional::positional_encoding;
pub use tensor::Matrix;
pub use weights::{init_weights, sidecar_path, EncoderWeights, LayerWeights, WeightsSidecar};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default maximum number of tokens per sequence.
pub const DEFAULT_MAX_SEQ_LEN: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    #[serde(default = "default_max_seq_len")]
    pub max_seq_len: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_seq_len() -> usize {
    DEFAULT_MAX_SEQ_LEN
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if self.vocab_size == 0 {
            return bad("vocab_size must be positive");
        }
        if self.d_model == 0 || !self.d_model.is_multiple_of(2) {
            return bad("d_model must be positive and even");
        }
        if self.n_heads == 0 || !self.d_model.is_multiple_of(self.n_heads) {
            return bad("n_heads must be positive and divide d_model");
        }
        if self.n_layers == 0 {
            return bad("n_layers must be positive");
        }
        if self.d_ff == 0 {
            return bad("d_ff must be positive");
        }
        if self.max_seq_len == 0 {
            return bad("max_seq_len must be at least 1");
        }
        Ok(())
    }
}

/// Unit-length document embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseEmbedding(pub Vec<f64>);

impl DenseEmbedding {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Scales `values` to unit L2 norm.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateEmbedding);
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Self(values))
    }
}

/// A validated configuration paired with its weights.
#[derive(Debug, Clone)]
pub struct Encoder {
    config: EncoderConfig,
    weights: EncoderWeights,
    positions: Matrix,
}

impl Encoder {
    pub fn new(config: EncoderConfig, weights: EncoderWeights) -> Result<Self> {
        config.validate()?;
        weights.validate(&config)?;
        let positions = positional_encoding(config.max_seq_len, config.d_model);
        Ok(Self {
            config,
            weights,
            positions,
        })
    }

    /// Encoder with freshly initialized weights from `config.seed`.
    pub fn from_seed(config: EncoderConfig) -> Result<Self> {
        let weights = init_weights(&config)?;
        Self::new(config, weights)
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn weights(&self) -> &EncoderWeights {
        &self.weights
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        if ids.is_empty() {
            return Err(Error::EmptyInput);
        }
        if ids.len() > self.config.max_seq_len {
            return Err(Error::SequenceTooLong {
                len: ids.len(),
                max: self.config.max_seq_len,
            });
        }
        if let Some(&id) = ids.iter().find(|&&id| id as usize >= self.config.vocab_size) {
            return Err(Error::TokenOutOfRange {
                id,
                vocab_size: self.config.vocab_size,
            });
        }
        Ok(())
    }

    /// Runs the blocks and returns the per-position hidden states before the
    /// final norm, together with every layer's attention maps.
    fn forward(&self, ids: &[u32]) -> Result<(Matrix, Vec<Vec<Matrix>>)> {
        self.check_ids(ids)?;
        let d = self.config.d_model;
        let mut x = Matrix::zeros(ids.len(), d);
        for (p, &id) in ids.iter().enumerate() {
            let emb = self.weights.embedding.row(id as usize);
            let pos = self.positions.row(p);
            for ((o, e), q) in x.row_mut(p).iter_mut().zip(emb).zip(pos) {
                *o = e + q;
            }
        }

        let mut maps = Vec::with_capacity(self.weights.layers.len());
        for layer in &self.weights.layers {
            let h = normalize_rows(&x, &layer.attn_norm)?;
            let attn = self_attention(&h, layer, self.config.n_heads);
            x.add_assign(&attn.output);
            maps.push(attn.weights);

            let h = normalize_rows(&x, &layer.ffn_norm)?;
            x.add_assign(&swiglu_ffn(&h, layer));
        }
        Ok((x, maps))
    }

    /// Mean over positions of the finally-normalized hidden states, before the
    /// unit-length scaling.
    pub fn pooled(&self, ids: &[u32]) -> Result<Vec<f64>> {
        let (x, _) = self.forward(ids)?;
        let x = normalize_rows(&x, &self.weights.final_norm)?;
        Ok(mean_rows(&x))
    }

    pub fn encode(&self, ids: &[u32]) -> Result<DenseEmbedding> {
        DenseEmbedding::normalized(self.pooled(ids)?)
    }

    /// Attention maps of every layer (`[layer][head]`) for one input.
    pub fn attention_maps(&self, ids: &[u32]) -> Result<Vec<Vec<Matrix>>> {
        Ok(self.forward(ids)?.1)
    }
}

/// Encodes `ids` with an ad-hoc encoder built from `cfg` and `weights`.
pub fn encode(ids: &[u32], cfg: &EncoderConfig, weights: &EncoderWeights) -> Result<DenseEmbedding> {
    Encoder::new(cfg.clone(), weights.clone())?.encode(ids)
}

fn normalize_rows(x: &Matrix, params: &RmsNormParams) -> Result<Matrix> {
    let mut out = x.clone();
    for r in 0..out.rows() {
        norm::rmsnorm_in_place(out.row_mut(r), &params.scale, &params.offset, RMSNORM_EPS)?;
    }
    Ok(out)
}

fn mean_rows(x: &Matrix) -> Vec<f64> {
    let mut acc = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = x.rows() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}
