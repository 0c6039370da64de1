use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::norm::RmsNormParams;
use super::tensor::Matrix;
use super::EncoderConfig;
use crate::error::{Error, Result};
use crate::io::{self, Reader};

const MAGIC: &[u8; 8] = b"HSENCW\0\0";
const VERSION: u32 = 1;

/// Parameters of one pre-norm transformer block.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub attn_norm: RmsNormParams,
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
    pub ffn_norm: RmsNormParams,
    /// `d_model × d_ff`, the branch passed through swish.
    pub w_swish: Matrix,
    /// `d_model × d_ff`, the linear gate.
    pub w_gate: Matrix,
    /// `d_ff × d_model`.
    pub w_out: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    /// `vocab_size × d_model`.
    pub embedding: Matrix,
    pub layers: Vec<LayerWeights>,
    pub final_norm: RmsNormParams,
}

/// Seeded uniform initialization in `[-1/sqrt(d_model), 1/sqrt(d_model)]`;
/// norm scales start at one and offsets at zero.
pub fn init_weights(cfg: &EncoderConfig) -> Result<EncoderWeights> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 1.0 / (cfg.d_model as f64).sqrt();
    let mut uniform = |rows: usize, cols: usize| {
        let data = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect();
        Matrix::from_vec(rows, cols, data)
    };
    let d = cfg.d_model;
    let embedding = uniform(cfg.vocab_size, d);
    let layers = (0..cfg.n_layers)
        .map(|_| LayerWeights {
            attn_norm: RmsNormParams::identity(d),
            wq: uniform(d, d),
            wk: uniform(d, d),
            wv: uniform(d, d),
            wo: uniform(d, d),
            ffn_norm: RmsNormParams::identity(d),
            w_swish: uniform(d, cfg.d_ff),
            w_gate: uniform(d, cfg.d_ff),
            w_out: uniform(cfg.d_ff, d),
        })
        .collect();
    Ok(EncoderWeights {
        embedding,
        layers,
        final_norm: RmsNormParams::identity(d),
    })
}

/// JSON document stored next to the binary weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsSidecar {
    pub format_version: u32,
    pub config: EncoderConfig,
    pub seed: u64,
    pub param_count: u64,
}

/// Path of the JSON sidecar for a weights file (`foo.bin` -> `foo.json`).
pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

impl EncoderWeights {
    /// Checks every shape against `cfg` and that all values are finite.
    pub fn validate(&self, cfg: &EncoderConfig) -> Result<()> {
        let d = cfg.d_model;
        let shape = |m: &Matrix, rows: usize, cols: usize, what: &str| {
            if m.shape() != (rows, cols) {
                return Err(Error::InvalidConfig(format!(
                    "{what} has shape {:?}, expected {:?}",
                    m.shape(),
                    (rows, cols)
                )));
            }
            if !m.is_finite() {
                return Err(Error::InvalidConfig(format!("{what} is not finite")));
            }
            Ok(())
        };
        let norm = |n: &RmsNormParams, what: &str| {
            if n.scale.len() != d || n.offset.len() != d {
                return Err(Error::InvalidConfig(format!("{what} has wrong length")));
            }
            if !n.scale.iter().chain(&n.offset).all(|v| v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{what} is not finite")));
            }
            Ok(())
        };
        shape(&self.embedding, cfg.vocab_size, d, "embedding")?;
        if self.layers.len() != cfg.n_layers {
            return Err(Error::InvalidConfig(format!(
                "{} layers, expected {}",
                self.layers.len(),
                cfg.n_layers
            )));
        }
        for l in &self.layers {
            norm(&l.attn_norm, "attention norm")?;
            for (m, what) in [(&l.wq, "wq"), (&l.wk, "wk"), (&l.wv, "wv"), (&l.wo, "wo")] {
                shape(m, d, d, what)?;
            }
            norm(&l.ffn_norm, "feed-forward norm")?;
            shape(&l.w_swish, d, cfg.d_ff, "w_swish")?;
            shape(&l.w_gate, d, cfg.d_ff, "w_gate")?;
            shape(&l.w_out, cfg.d_ff, d, "w_out")?;
        }
        norm(&self.final_norm, "final norm")
    }

    /// All parameters in serialization order.
    fn flat(&self) -> Vec<&[f64]> {
        let mut parts: Vec<&[f64]> = vec![self.embedding.as_slice()];
        for l in &self.layers {
            parts.extend([
                l.attn_norm.scale.as_slice(),
                &l.attn_norm.offset,
                l.wq.as_slice(),
                l.wk.as_slice(),
                l.wv.as_slice(),
                l.wo.as_slice(),
                &l.ffn_norm.scale,
                &l.ffn_norm.offset,
                l.w_swish.as_slice(),
                l.w_gate.as_slice(),
                l.w_out.as_slice(),
            ]);
        }
        parts.extend([self.final_norm.scale.as_slice(), &self.final_norm.offset]);
        parts
    }

    pub fn param_count(&self) -> usize {
        self.flat().iter().map(|p| p.len()).sum()
    }

    /// Writes raw little-endian `f64` parameters to `path` and the config to
    /// the JSON sidecar. Both files are replaced atomically.
    pub fn save(&self, cfg: &EncoderConfig, path: &Path) -> Result<()> {
        self.validate(cfg)?;
        let count = self.param_count() as u64;
        io::write_atomic(path, |w| {
            io::write_header(w, MAGIC, VERSION)?;
            w.write_all(&count.to_le_bytes())?;
            for part in self.flat() {
                io::write_f64s(w, part)?;
            }
            Ok(())
        })?;
        let sidecar = WeightsSidecar {
            format_version: VERSION,
            config: cfg.clone(),
            seed: cfg.seed,
            param_count: count,
        };
        let json = serde_json::to_vec_pretty(&sidecar)?;
        io::write_atomic(&sidecar_path(path), |w| w.write_all(&json))
    }

    /// Loads weights written by [`EncoderWeights::save`].
    pub fn load(path: &Path) -> Result<(EncoderConfig, EncoderWeights)> {
        let side_path = sidecar_path(path);
        let json = std::fs::read(&side_path).map_err(|e| Error::io(&side_path, e))?;
        let sidecar: WeightsSidecar = serde_json::from_slice(&json)?;
        let cfg = sidecar.config;
        cfg.validate()?;

        let mut r = Reader::open(path)?;
        r.header(MAGIC, VERSION)?;
        let count = r.u64()?;
        if count != sidecar.param_count {
            return Err(r.fail("parameter count disagrees with sidecar"));
        }
        let d = cfg.d_model;
        let matrix = |r: &mut Reader, rows, cols| -> Result<Matrix> {
            Ok(Matrix::from_vec(rows, cols, r.f64s(rows * cols)?))
        };
        let norm = |r: &mut Reader| -> Result<RmsNormParams> {
            Ok(RmsNormParams {
                scale: r.f64s(d)?,
                offset: r.f64s(d)?,
            })
        };
        let embedding = matrix(&mut r, cfg.vocab_size, d)?;
        let mut layers = Vec::with_capacity(cfg.n_layers);
        for _ in 0..cfg.n_layers {
            let attn_norm = norm(&mut r)?;
            let wq = matrix(&mut r, d, d)?;
            let wk = matrix(&mut r, d, d)?;
            let wv = matrix(&mut r, d, d)?;
            let wo = matrix(&mut r, d, d)?;
            let ffn_norm = norm(&mut r)?;
            let w_swish = matrix(&mut r, d, cfg.d_ff)?;
            let w_gate = matrix(&mut r, d, cfg.d_ff)?;
            let w_out = matrix(&mut r, cfg.d_ff, d)?;
            layers.push(LayerWeights {
                attn_norm,
                wq,
                wk,
                wv,
                wo,
                ffn_norm,
                w_swish,
                w_gate,
                w_out,
            });
        }
        let final_norm = norm(&mut r)?;
        r.finish()?;
        let weights = EncoderWeights {
            embedding,
            layers,
            final_norm,
        };
        if weights.param_count() as u64 != count {
            return Err(Error::format(path, "parameter count mismatch"));
        }
        weights.validate(&cfg)?;
        Ok((cfg, weights))
    }
}
