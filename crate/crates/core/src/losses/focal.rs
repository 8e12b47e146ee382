use crate::error::{Error, Result};
use crate::nn::PROB_FLOOR;

use super::ProbVector;

/// `−(1 − p)^γ · ln p` with `p = probs[label]` clamped to `[1e-12, 1]`.
pub fn focal_loss(probs: &ProbVector, label: usize, gamma: f64) -> Result<f64> {
    Ok(focal_loss_with_grad(probs, label, gamma)?.0)
}

/// Focal loss and its gradient w.r.t. the logits that produced `probs`
/// through a softmax. The gradient is zero where the clamp is active.
pub fn focal_loss_with_grad(
    probs: &ProbVector,
    label: usize,
    gamma: f64,
) -> Result<(f64, Vec<f64>)> {
    let p_all = probs.as_slice();
    if label >= p_all.len() {
        return Err(Error::Label {
            label,
            classes: p_all.len(),
        });
    }
    let raw = p_all[label];
    let p = raw.clamp(PROB_FLOOR, 1.0);
    let q = 1.0 - p;
    let loss = -q.powf(gamma) * p.ln();
    if raw < PROB_FLOOR || q <= 0.0 {
        return Ok((loss, vec![0.0; p_all.len()]));
    }
    // d/dp of −q^γ ln p, then chain through dp/dz_j = p (δ_jy − p_j).
    let d_dp = gamma * q.powf(gamma - 1.0) * p.ln() - q.powf(gamma) / p;
    let grad = p_all
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            let delta = if j == label { 1.0 } else { 0.0 };
            d_dp * p * (delta - pj)
        })
        .collect();
    Ok((loss, grad))
}
