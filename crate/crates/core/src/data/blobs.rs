use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::nn::{sigmoid, Matrix, XorShift64Star};

/// Added to the seed for the test split so train and test never share draws.
const TEST_SEED_OFFSET: u64 = 0x5DEE_CE66_D1CE_5EED;

/// Isotropic Gaussian clusters squashed into [0, 1].
///
/// Class centers sit on a fixed simplex: the scaled unit vectors `e_k` when
/// `dim ≥ class_count`, otherwise a regular polygon of radius 1 in the first
/// two coordinates (a line when `dim == 1`). Each coordinate of
/// `center + spread·N(0, I) + shift` is mapped through the logistic function,
/// which keeps every feature in (0, 1) and preserves the cluster ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub class_count: usize,
    pub per_class: usize,
    pub dim: usize,
    pub spread: f64,
    /// Offset added to every coordinate before squashing; non-zero values
    /// give a shifted copy of the distribution for OOD experiments.
    #[serde(default)]
    pub shift: f64,
}

impl BlobSpec {
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let k = self.class_count;
        (0..k)
            .map(|c| {
                let mut center = vec![0.0; self.dim];
                if self.dim >= k {
                    center[c] = 1.0;
                } else if self.dim >= 2 {
                    let angle = std::f64::consts::TAU * c as f64 / k as f64;
                    center[0] = angle.cos();
                    center[1] = angle.sin();
                } else {
                    center[0] = c as f64 - (k - 1) as f64 / 2.0;
                }
                center
            })
            .collect()
    }
}

pub fn synth_blobs(spec: &BlobSpec, seed: u64, split: Split) -> Result<LabeledDataset> {
    if spec.class_count < 2 || spec.dim == 0 {
        return Err(Error::Config(
            "blobs need at least two classes and one dimension".into(),
        ));
    }
    if !(spec.spread >= 0.0 && spec.spread.is_finite()) {
        return Err(Error::Config(format!(
            "spread must be finite and non-negative, got {}",
            spec.spread
        )));
    }
    let seed = match split {
        Split::Train => seed,
        Split::Test => seed.wrapping_add(TEST_SEED_OFFSET),
    };
    let mut rng = XorShift64Star::new(seed);
    let centers = spec.centers();
    let n = spec.class_count * spec.per_class;
    let mut data = Vec::with_capacity(n * spec.dim);
    let mut labels = Vec::with_capacity(n);
    // Interleave classes so any prefix is roughly balanced.
    for _ in 0..spec.per_class {
        for (label, center) in centers.iter().enumerate() {
            for &c in center {
                data.push(sigmoid(c + spec.spread * rng.normal() + spec.shift));
            }
            labels.push(label);
        }
    }
    LabeledDataset::new(
        Matrix::new(n, spec.dim, data)?,
        labels,
        spec.class_count,
        split,
    )
}
