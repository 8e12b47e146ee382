use serde::{Deserialize, Serialize};

use super::{dfl_loss, ohem_regression_loss};
use crate::error::{contract, Result};

/// The regression objective of the uncertainty head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EstimatorObjective {
    /// Distributional focal loss. With `zero_density` every density factor
    /// is replaced by 0, which reduces the loss to plain squared error.
    Dfl { zero_density: bool },
    /// Plain mean squared error, computed without any weighting.
    Mse,
    /// Squared error restricted to the hardest fraction of each batch.
    Ohem { keep_fraction: f64 },
}

impl EstimatorObjective {
    pub fn uses_density(&self) -> bool {
        matches!(
            self,
            EstimatorObjective::Dfl {
                zero_density: false
            }
        )
    }

    /// Mean batch loss and its gradient w.r.t. each estimate (the `1/n`
    /// factor included).
    pub fn batch_loss(
        &self,
        u_hat: &[f64],
        targets: &[f64],
        densities: &[f64],
        gamma: f64,
    ) -> Result<(f64, Vec<f64>)> {
        let n = u_hat.len();
        if n == 0 || targets.len() != n || densities.len() != n {
            return Err(contract(format!(
                "batch loss over {} estimates, {} targets, {} densities",
                n,
                targets.len(),
                densities.len()
            )));
        }
        let nf = n as f64;
        match *self {
            EstimatorObjective::Dfl { zero_density } => {
                let mut total = 0.0;
                let mut grad = Vec::with_capacity(n);
                for i in 0..n {
                    let d = if zero_density { 0.0 } else { densities[i] };
                    let (l, g) = dfl_loss(u_hat[i], targets[i], d, gamma);
                    total += l;
                    grad.push(g / nf);
                }
                Ok((total / nf, grad))
            }
            EstimatorObjective::Mse => {
                let mut total = 0.0;
                let mut grad = Vec::with_capacity(n);
                for i in 0..n {
                    let diff = u_hat[i] - targets[i];
                    total += diff * diff;
                    grad.push(2.0 * diff / nf);
                }
                Ok((total / nf, grad))
            }
            EstimatorObjective::Ohem { keep_fraction } => {
                let sq: Vec<f64> = u_hat
                    .iter()
                    .zip(targets)
                    .map(|(a, b)| (a - b) * (a - b))
                    .collect();
                let (loss, mask) = ohem_regression_loss(&sq, keep_fraction)?;
                let kept = mask.iter().filter(|&&m| m).count() as f64;
                let grad = (0..n)
                    .map(|i| {
                        if mask[i] {
                            2.0 * (u_hat[i] - targets[i]) / kept
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Ok((loss, grad))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_is_mean_of_samples() {
        let u_hat = [0.2, 0.7, 0.9];
        let u = [0.1, 0.4, 0.95];
        let dens = [0.5, 0.1, 0.0];
        let obj = EstimatorObjective::Dfl {
            zero_density: false,
        };
        let (batch, _) = obj.batch_loss(&u_hat, &u, &dens, 1.7).unwrap();
        let mean = (0..3)
            .map(|i| dfl_loss(u_hat[i], u[i], dens[i], 1.7).0)
            .sum::<f64>()
            / 3.0;
        assert!((batch - mean).abs() < 1e-12);
    }

    #[test]
    fn zero_density_matches_mse_bitwise() {
        let u_hat = [0.2, 0.7, 0.9, 0.33];
        let u = [0.1, 0.4, 0.95, 0.0];
        let dens = [0.5, 0.1, 0.0, 0.9];
        let a = EstimatorObjective::Dfl { zero_density: true }
            .batch_loss(&u_hat, &u, &dens, 3.0)
            .unwrap();
        let b = EstimatorObjective::Mse
            .batch_loss(&u_hat, &u, &dens, 3.0)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_ragged_batch() {
        assert!(EstimatorObjective::Mse
            .batch_loss(&[0.1], &[], &[], 1.0)
            .is_err());
    }
}
