//! Labeled datasets: seeded Gaussian blobs and IDX image files.

mod blobs;
mod idx;

pub use blobs::{synth_blobs, BlobSpec};
pub use idx::{
    load_idx, load_idx_unlabeled, read_idx_images, read_idx_labels, write_idx_images,
    write_idx_labels, IDX_CLASS_COUNT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Environment variable naming the directory relative IDX paths resolve in.
pub const DATA_DIR_ENV: &str = "BTCP_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
    pub split: Split,
}

impl LabeledDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        class_count: usize,
        split: Split,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Dimension {
                context: "dataset labels vs feature rows",
                expected: features.rows(),
                actual: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::Label {
                label,
                classes: class_count,
            });
        }
        Ok(Self {
            features,
            labels,
            class_count,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// The first `n` samples (all of them if fewer).
    pub fn truncate(mut self, n: usize) -> Self {
        if n < self.len() {
            let keep: Vec<usize> = (0..n).collect();
            self.features = self.features.select_rows(&keep);
            self.labels.truncate(n);
        }
        self
    }
}

/// An in-distribution test set paired with an OOD set of the same width.
/// OOD labels are never read.
#[derive(Debug, Clone)]
pub struct OodPair {
    pub in_distribution: LabeledDataset,
    pub ood: LabeledDataset,
}

pub fn make_ood_pair(in_ds: LabeledDataset, ood_ds: LabeledDataset) -> Result<OodPair> {
    if in_ds.dim() != ood_ds.dim() {
        return Err(Error::Dimension {
            context: "OOD feature width vs in-distribution width",
            expected: in_ds.dim(),
            actual: ood_ds.dim(),
        });
    }
    Ok(OodPair {
        in_distribution: in_ds,
        ood: ood_ds,
    })
}
