//! True-class-probability targets and the losses that regress onto them.
//!
//! The uncertainty target of a sample is `u = 1 − ŷ[label]`. The
//! distributional focal loss weights the squared error of an estimate `û` by
//! `(1 − ρ(u))^γ`, where `ρ(u)` is the fraction of the target population
//! within `±ε` of `u`. Dense regions of the target distribution, usually the
//! many confidently-correct samples near `u = 0`, are down-weighted. `γ` is
//! tied to the population variance as `1 / (12·var(U))`, which is 1 for a
//! uniform population.
//!
//! Targets and density factors are constants with respect to the estimate:
//! no gradient flows through them.

mod dfl;
mod focal;
mod objective;
mod ohem;
mod population;

pub use dfl::{dfl_loss, DflConfig, GammaMode};
pub use focal::{focal_loss, focal_loss_with_grad};
pub use objective::EstimatorObjective;
pub use ohem::ohem_regression_loss;
pub use population::{auto_gamma, GammaClamp, UncertaintyPopulation, ZERO_VARIANCE};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// A class-probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates non-negative entries summing to 1 within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(contract("probability vector must not be empty"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(contract("probabilities must be finite and non-negative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(contract(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self(probs))
    }

    /// Wraps the output of a softmax without re-validating it.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// TCP uncertainty target: `1 − yhat[label]`, clamped into [0, 1].
pub fn tcp_score(yhat: &ProbVector, label: usize) -> Result<f64> {
    let p = yhat.as_slice();
    if label >= p.len() {
        return Err(Error::Label {
            label,
            classes: p.len(),
        });
    }
    Ok((1.0 - p[label]).clamp(0.0, 1.0))
}

/// Maps uncertainty to confidence and back: `1 − x`.
#[inline]
pub fn complement(x: f64) -> f64 {
    1.0 - x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tcp_examples() {
        let y = ProbVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        assert!((tcp_score(&y, 0).unwrap() - 0.3).abs() < 1e-15);
        let one_hot = ProbVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(tcp_score(&one_hot, 1).unwrap(), 0.0);
        let k = 4;
        let uniform = ProbVector::new(vec![1.0 / k as f64; k]).unwrap();
        for label in 0..k {
            assert!((tcp_score(&uniform, label).unwrap() - (1.0 - 1.0 / k as f64)).abs() < 1e-15);
        }
        assert!(matches!(tcp_score(&y, 3), Err(Error::Label { .. })));
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(0.0), 1.0);
        assert_eq!(complement(0.5), 0.5);
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
        assert_eq!(ProbVector::new(vec![0.2, 0.5, 0.3]).unwrap().argmax(), 1);
    }

    proptest! {
        #[test]
        fn tcp_is_affine_in_labeled_probability(
            raw in proptest::collection::vec(0.0f64..1.0, 2..8),
            pick in 0usize..8,
        ) {
            let sum: f64 = raw.iter().sum::<f64>() + 1e-9;
            let probs: Vec<f64> = raw.iter().map(|v| (v + 1e-9 / raw.len() as f64) / sum).collect();
            let y = ProbVector::from_normalized(probs.clone());
            let label = pick % probs.len();
            prop_assert_eq!(tcp_score(&y, label).unwrap(), (1.0 - probs[label]).clamp(0.0, 1.0));
        }

        #[test]
        fn complement_is_an_involution(x in 0.0f64..=1.0) {
            prop_assert!((complement(complement(x)) - x).abs() <= f64::EPSILON);
        }
    }
}
