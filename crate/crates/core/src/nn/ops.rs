use crate::error::{Error, Result};
use crate::losses::ProbVector;

/// Floor applied to the labeled-class probability before taking its log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> ProbVector {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    ProbVector::from_normalized(exps.into_iter().map(|e| e / sum).collect())
}

/// `−ln(max(probs[label], 1e-12))` and its gradient w.r.t. the logits,
/// `probs − one_hot(label)`.
pub fn cross_entropy_loss(probs: &ProbVector, label: usize) -> Result<(f64, Vec<f64>)> {
    let p = probs.as_slice();
    if label >= p.len() {
        return Err(Error::Label {
            label,
            classes: p.len(),
        });
    }
    let p_label = if p[label] < PROB_FLOOR {
        PROB_FLOOR
    } else {
        p[label]
    };
    let loss = -p_label.ln();
    let mut grad = p.to_vec();
    grad[label] -= 1.0;
    Ok((loss, grad))
}
