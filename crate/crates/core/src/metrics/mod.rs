//! Failure-prediction and OOD metrics.
//!
//! A sample is predicted correct when its uncertainty is below the threshold
//! `τ` (default 0.5) and incorrect when `u ≥ τ`:
//!
//! | uncertainty | correct | incorrect |
//! |-------------|---------|-----------|
//! | `u < τ`     | TP      | FP        |
//! | `u ≥ τ`     | FN      | TN        |
//!
//! AUROC treats incorrect classifications as the positive class ranked by
//! uncertainty.

mod auroc;
mod confusion;
mod stats;

pub use auroc::auroc;
pub use confusion::{bacc, confusion, fnr, fpr, ConfusionCounts};
pub use stats::{avg_uncertainty, distribution_stats, histogram, ood_detection_accuracy};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Default decision threshold.
pub const DEFAULT_TAU: f64 = 0.5;

/// Default histogram resolution.
pub const DEFAULT_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySample {
    pub u: f64,
    /// Whether the classifier's prediction matched the label.
    pub correct: bool,
}

impl UncertaintySample {
    pub fn new(u: f64, correct: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(contract(format!("uncertainty {u} outside [0, 1]")));
        }
        Ok(Self { u, correct })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub bacc: f64,
    pub auroc: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub tau: f64,
}

/// All threshold and ranking metrics at once. Fails when either the correct
/// or the incorrect class is empty.
pub fn failure_report(samples: &[UncertaintySample], tau: f64) -> Result<FailureReport> {
    let c = confusion(samples, tau)?;
    Ok(FailureReport {
        bacc: bacc(&c)?,
        auroc: auroc(samples)?,
        fpr: fpr(&c)?,
        fnr: fnr(&c)?,
        tau,
    })
}
