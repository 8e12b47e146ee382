use serde::{Deserialize, Serialize};

use super::UncertaintySample;
use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(samples: &[UncertaintySample], tau: f64) -> Result<ConfusionCounts> {
    if samples.is_empty() {
        return Err(contract("confusion matrix of an empty sample list"));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(contract(format!("threshold {tau} outside [0, 1]")));
    }
    let mut c = ConfusionCounts::default();
    for s in samples {
        match (s.u < tau, s.correct) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Share of incorrect classifications accepted as correct: `FP / (FP + TN)`.
pub fn fpr(c: &ConfusionCounts) -> Result<f64> {
    let denom = c.fp + c.tn;
    if denom == 0 {
        return Err(Error::UndefinedMetric {
            metric: "fpr",
            reason: "no incorrect classifications",
        });
    }
    Ok(c.fp as f64 / denom as f64)
}

/// Share of correct classifications rejected as incorrect: `FN / (TP + FN)`.
pub fn fnr(c: &ConfusionCounts) -> Result<f64> {
    let denom = c.tp + c.fn_;
    if denom == 0 {
        return Err(Error::UndefinedMetric {
            metric: "fnr",
            reason: "no correct classifications",
        });
    }
    Ok(c.fn_ as f64 / denom as f64)
}

pub fn bacc(c: &ConfusionCounts) -> Result<f64> {
    let pos = c.tp + c.fn_;
    let neg = c.fp + c.tn;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric {
            metric: "bacc",
            reason: "needs both correct and incorrect classifications",
        });
    }
    Ok(0.5 * (c.tp as f64 / pos as f64 + c.tn as f64 / neg as f64))
}
