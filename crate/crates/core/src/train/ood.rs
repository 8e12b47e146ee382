use serde::{Deserialize, Serialize};

use crate::data::OodPair;
use crate::error::{Error, Result};
use crate::metrics::{avg_uncertainty, ood_detection_accuracy};
use crate::nn::{BtcpNetwork, Matrix};

use super::pipeline::EVAL_BATCH;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OodReport {
    pub acc: f64,
    pub au_in: f64,
    pub au_ood: f64,
    pub tau: f64,
    pub n_in: usize,
    pub n_ood: usize,
}

/// Uncertainty-head output for every row.
pub fn predict_uncertainty(net: &BtcpNetwork, features: &Matrix) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(features.rows());
    let n = features.rows();
    for start in (0..n).step_by(EVAL_BATCH) {
        let rows: Vec<usize> = (start..(start + EVAL_BATCH).min(n)).collect();
        out.extend(net.forward(&features.select_rows(&rows))?.uncertainty);
    }
    Ok(out)
}

/// Average uncertainty on each side of the pair and the balanced accuracy of
/// separating them at `tau`.
pub fn evaluate_ood(net: &BtcpNetwork, pair: &OodPair, tau: f64) -> Result<OodReport> {
    let dim = net.input_dim();
    for ds in [&pair.in_distribution, &pair.ood] {
        if ds.dim() != dim {
            return Err(Error::Dimension {
                context: "OOD dataset width vs network input",
                expected: dim,
                actual: ds.dim(),
            });
        }
    }
    let u_in = predict_uncertainty(net, &pair.in_distribution.features)?;
    let u_ood = predict_uncertainty(net, &pair.ood.features)?;
    Ok(OodReport {
        acc: ood_detection_accuracy(&u_in, &u_ood, tau)?,
        au_in: avg_uncertainty(&u_in)?,
        au_ood: avg_uncertainty(&u_ood)?,
        tau,
        n_in: u_in.len(),
        n_ood: u_ood.len(),
    })
}
