use super::tensor::Matrix;
use super::weights::LayerWeights;

/// `x · sigmoid(x)`.
pub fn swish(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

/// `(swish(x W) ⊙ (x V)) W_out`.
pub fn swiglu_ffn(x: &Matrix, layer: &LayerWeights) -> Matrix {
    let mut hidden = x.matmul(&layer.w_swish);
    let gate = x.matmul(&layer.w_gate);
    for (h, &g) in hidden.as_mut_slice().iter_mut().zip(gate.as_slice()) {
        *h = swish(*h) * g;
    }
    hidden.matmul(&layer.w_out)
}
