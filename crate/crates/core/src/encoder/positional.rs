use super::tensor::Matrix;

/// Sinusoidal position signal: `sin(p / 10000^(2i/d))` in even column `2i`,
/// the matching cosine in column `2i + 1`.
pub fn positional_encoding(seq_len: usize, d_model: usize) -> Matrix {
    let mut pe = Matrix::zeros(seq_len, d_model);
    for p in 0..seq_len {
        let row = pe.row_mut(p);
        for i in (0..d_model).step_by(2) {
            let angle = p as f64 / 10000f64.powf(i as f64 / d_model as f64);
            row[i] = angle.sin();
            if i + 1 < d_model {
                row[i + 1] = angle.cos();
            }
        }
    }
    pe
}
