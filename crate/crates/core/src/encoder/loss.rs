//! Training losses with their analytic gradients.

use super::attention::softmax;
use crate::error::{Error, Result};

/// Softmax cross-entropy: `-ln softmax(logits)[label]` and its gradient
/// `softmax(logits) - onehot(label)`.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if logits.len() < 2 {
        return Err(Error::InvalidConfig(
            "cross-entropy needs at least two classes".into(),
        ));
    }
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            num_classes: logits.len(),
        });
    }
    let (argmax, max) = logits
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best });
    // log-sum-exp written as max + ln(1 + rest) to keep tiny losses exact
    let rest: f64 = logits
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != argmax)
        .map(|(_, &x)| (x - max).exp())
        .sum();
    let loss = (max - logits[label]) + rest.ln_1p();

    let mut grad = softmax(logits);
    grad[label] -= 1.0;
    Ok((loss, grad))
}

/// Mean squared error and its gradient `2 (pred - target) / n`.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: pred.len(),
            actual: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = pred.len() as f64;
    let diff: Vec<f64> = pred.iter().zip(target).map(|(p, t)| p - t).collect();
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    let grad = diff.iter().map(|d| 2.0 * d / n).collect();
    Ok((loss, grad))
}
