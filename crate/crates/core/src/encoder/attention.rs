use super::tensor::Matrix;
use super::weights::LayerWeights;

/// Output of one multi-head self-attention pass.
#[derive(Debug, Clone)]
pub struct Attention {
    pub output: Matrix,
    /// One `seq_len × seq_len` row-stochastic matrix per head.
    pub weights: Vec<Matrix>,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// `softmax(Q Kᵀ / sqrt(d_head)) V` per head, heads concatenated, then `· O`.
pub fn self_attention(x: &Matrix, layer: &LayerWeights, n_heads: usize) -> Attention {
    let (seq_len, d_model) = x.shape();
    assert!(n_heads > 0 && d_model % n_heads == 0, "heads must divide d_model");
    let d_head = d_model / n_heads;
    let scale = 1.0 / (d_head as f64).sqrt();

    let q = x.matmul(&layer.wq);
    let k = x.matmul(&layer.wk);
    let v = x.matmul(&layer.wv);

    let mut context = Matrix::zeros(seq_len, d_model);
    let mut weights = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let cols = h * d_head..(h + 1) * d_head;
        let mut attn = Matrix::zeros(seq_len, seq_len);
        for i in 0..seq_len {
            let qi = &q.row(i)[cols.clone()];
            let row = attn.row_mut(i);
            for (j, score) in row.iter_mut().enumerate() {
                let kj = &k.row(j)[cols.clone()];
                *score = qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() * scale;
            }
            softmax_in_place(row);
        }
        for i in 0..seq_len {
            for j in 0..seq_len {
                let w = attn[(i, j)];
                let vj = &v.row(j)[cols.clone()];
                let out = &mut context.row_mut(i)[cols.clone()];
                for (o, &vv) in out.iter_mut().zip(vj) {
                    *o += w * vv;
                }
            }
        }
        weights.push(attn);
    }

    Attention {
        output: context.matmul(&layer.wo),
        weights,
    }
}
