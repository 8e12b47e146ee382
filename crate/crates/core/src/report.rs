//! Serializable experiment reports and their flat CSV views.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::BlobSpec;
use crate::error::{Error, Result};
use crate::losses::EstimatorObjective;
use crate::metrics::FailureReport;
use crate::train::{EpochRecord, TrainConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Where the data of a run came from; enough to regenerate or reload it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DatasetDescriptor {
    /// `spec.per_class` sizes the training split.
    Blobs {
        spec: BlobSpec,
        test_per_class: usize,
        data_seed: u64,
    },
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        train_limit: Option<usize>,
        test_limit: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub test_accuracy: f64,
    pub failure: Option<FailureReport>,
    pub uncertainty_mean: f64,
    pub uncertainty_std: f64,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: TrainConfig,
    pub objective: EstimatorObjective,
    pub dataset: Option<DatasetDescriptor>,
    pub train_size: usize,
    pub test_size: usize,
    pub epochs: Vec<EpochRecord>,
    pub final_metrics: FinalMetrics,
    pub test_uncertainties: Vec<f64>,
    pub test_correct: Vec<bool>,
    /// Equal-width counts over [0, 1] of the final test uncertainties.
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    pub stage: String,
    pub epoch: usize,
    pub train_loss: f64,
    pub gamma: Option<f64>,
    pub test_accuracy: f64,
    pub bacc: Option<f64>,
    pub auroc: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub uncertainty_mean: Option<f64>,
    pub uncertainty_std: Option<f64>,
}

/// One metric value. `stage` is `final` for the end-of-run evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub stage: String,
    pub epoch: usize,
    pub metric: String,
    pub value: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "report schema version {} is not supported (expected {REPORT_SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        if report.test_uncertainties.len() != report.test_correct.len() {
            return Err(Error::Dimension {
                context: "report uncertainties vs correctness flags",
                expected: report.test_uncertainties.len(),
                actual: report.test_correct.len(),
            });
        }
        Ok(report)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn epoch_rows(&self) -> Vec<EpochRow> {
        self.epochs
            .iter()
            .map(|e| EpochRow {
                stage: e.stage.as_str().to_string(),
                epoch: e.epoch,
                train_loss: e.train_loss,
                gamma: e.gamma,
                test_accuracy: e.test_accuracy,
                bacc: e.metrics.map(|m| m.bacc),
                auroc: e.metrics.map(|m| m.auroc),
                fpr: e.metrics.map(|m| m.fpr),
                fnr: e.metrics.map(|m| m.fnr),
                uncertainty_mean: e.uncertainty_mean,
                uncertainty_std: e.uncertainty_std,
            })
            .collect()
    }

    pub fn metric_rows(&self) -> Vec<MetricRow> {
        let tau = self.config.tau;
        let mut rows = Vec::new();
        let mut push = |stage: &str, epoch: usize, metric: &str, value: f64| {
            rows.push(MetricRow {
                stage: stage.to_string(),
                epoch,
                metric: metric.to_string(),
                value,
                tau,
            })
        };
        for e in &self.epochs {
            let stage = e.stage.as_str();
            push(stage, e.epoch, "accuracy", e.test_accuracy);
            if let Some(m) = e.metrics {
                push(stage, e.epoch, "bacc", m.bacc);
                push(stage, e.epoch, "auroc", m.auroc);
                push(stage, e.epoch, "fpr", m.fpr);
                push(stage, e.epoch, "fnr", m.fnr);
            }
        }
        let f = &self.final_metrics;
        push("final", 0, "accuracy", f.test_accuracy);
        if let Some(m) = f.failure {
            push("final", 0, "bacc", m.bacc);
            push("final", 0, "auroc", m.auroc);
            push("final", 0, "fpr", m.fpr);
            push("final", 0, "fnr", m.fnr);
        }
        push("final", 0, "uncertainty_mean", f.uncertainty_mean);
        push("final", 0, "uncertainty_std", f.uncertainty_std);
        rows
    }

    /// Re-bins the final test uncertainties.
    pub fn histogram_rows(&self, bins: usize) -> Result<Vec<HistogramRow>> {
        let counts = crate::metrics::histogram(&self.test_uncertainties, bins)?;
        Ok(histogram_rows(&counts))
    }

    pub fn write_epochs_csv(&self, path: &Path) -> Result<()> {
        write_csv(path, &self.epoch_rows())
    }

    pub fn write_metrics_csv(&self, path: &Path) -> Result<()> {
        write_csv(path, &self.metric_rows())
    }
}

/// Bin edges for equal-width counts over [0, 1].
pub fn histogram_rows(counts: &[usize]) -> Vec<HistogramRow> {
    let bins = counts.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramRow {
            bin_left: i as f64 / bins,
            bin_right: (i + 1) as f64 / bins,
            count,
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
