//! Root-mean-square normalization.
//!
//! `RMS(a) = sqrt(mean(a_i^2))`, and the normalized vector is
//! `a_i / (RMS(a) + eps) * g_i + b_i`. The `eps` sits outside the square root
//! so that `eps = 0` gives the exact textbook form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default stabilizer added to the RMS denominator.
pub const RMSNORM_EPS: f64 = 1e-6;

pub fn rms(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mean_sq = a.iter().map(|x| x * x).sum::<f64>() / a.len() as f64;
    Ok(mean_sq.sqrt())
}

pub fn rmsnorm(a: &[f64], g: &[f64], b: &[f64], eps: f64) -> Result<Vec<f64>> {
    let mut out = a.to_vec();
    rmsnorm_in_place(&mut out, g, b, eps)?;
    Ok(out)
}

pub(crate) fn rmsnorm_in_place(a: &mut [f64], g: &[f64], b: &[f64], eps: f64) -> Result<()> {
    for other in [g.len(), b.len()] {
        if other != a.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                actual: other,
            });
        }
    }
    let denom = rms(a)? + eps;
    for ((x, &gi), &bi) in a.iter_mut().zip(g).zip(b) {
        *x = *x / denom * gi + bi;
    }
    Ok(())
}

/// Learnable scale `g` and offset `b` of one normalization site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsNormParams {
    pub scale: Vec<f64>,
    pub offset: Vec<f64>,
}

impl RmsNormParams {
    /// `g = 1`, `b = 0`.
    pub fn identity(dim: usize) -> Self {
        Self {
            scale: vec![1.0; dim],
            offset: vec![0.0; dim],
        }
    }

    pub fn apply(&self, a: &[f64], eps: f64) -> Result<Vec<f64>> {
        rmsnorm(a, &self.scale, &self.offset, eps)
    }
}
