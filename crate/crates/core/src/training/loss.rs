use crate::error::{contract, Result};
use crate::tensor::Tensor;

/// Softmax cross-entropy of `logits` against class `label`.
///
/// Returns the loss `-log softmax(logits)[label]` and its gradient
/// `softmax(logits) - onehot(label)`. The maximum logit is subtracted before
/// exponentiating.
pub fn cross_entropy(logits: &Tensor, label: usize) -> Result<(f64, Tensor)> {
    let z = logits.data();
    if label >= z.len() {
        return Err(contract(format!("label {label} out of range for {} classes", z.len())));
    }
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (z[label] - max);
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    Ok((loss, Tensor::from_vec(logits.shape().to_vec(), grad)?))
}
