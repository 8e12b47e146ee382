use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{DflConfig, EstimatorObjective};
use crate::metrics::{DEFAULT_BINS, DEFAULT_TAU};
use crate::nn::{NetworkSpec, SgdConfig};

/// Which uncertainty objective a run trains with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Distributional focal loss.
    Btcp,
    /// Same pipeline with every density factor forced to 0 (plain MSE).
    TcpMse,
    /// Squared error on the hardest fraction of each batch.
    Ohem,
}

impl BaselineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMode::Btcp => "btcp",
            BaselineMode::TcpMse => "tcp_mse",
            BaselineMode::Ohem => "ohem",
        }
    }
}

impl std::str::FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "btcp" => Ok(BaselineMode::Btcp),
            "tcp_mse" => Ok(BaselineMode::TcpMse),
            "ohem" => Ok(BaselineMode::Ohem),
            other => Err(Error::Config(format!(
                "unknown baseline {other:?} (expected btcp, tcp_mse or ohem)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs_classifier: usize,
    pub epochs_estimator: usize,
    pub epochs_finetune: usize,
    pub lr: f64,
    pub lr_finetune: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Weight of the uncertainty loss in the fine-tuning joint loss.
    pub lambda_joint: f64,
    pub tau: f64,
    pub dfl: DflConfig,
    pub seed: u64,
    pub baseline: BaselineMode,
    /// Fraction of each batch kept by the OHEM baseline.
    pub ohem_keep_fraction: f64,
    pub encoder_widths: Vec<usize>,
    pub uncertainty_hidden: Vec<usize>,
    pub histogram_bins: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            epochs_classifier: 5,
            epochs_estimator: 10,
            epochs_finetune: 2,
            lr: 0.001,
            lr_finetune: 0.0001,
            momentum: 0.9,
            weight_decay: 0.0001,
            lambda_joint: 1.0,
            tau: DEFAULT_TAU,
            dfl: DflConfig::default(),
            seed: 0,
            baseline: BaselineMode::Btcp,
            ohem_keep_fraction: 0.5,
            encoder_widths: vec![64, 32],
            uncertainty_hidden: vec![32],
            histogram_bins: DEFAULT_BINS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !(self.lambda_joint >= 0.0 && self.lambda_joint.is_finite()) {
            return Err(Error::Config("lambda must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!(
                "tau must be in [0, 1], got {}",
                self.tau
            )));
        }
        if !(self.ohem_keep_fraction > 0.0 && self.ohem_keep_fraction <= 1.0) {
            return Err(Error::Config("OHEM keep fraction must be in (0, 1]".into()));
        }
        if self.histogram_bins == 0 {
            return Err(Error::Config("histogram needs at least one bin".into()));
        }
        self.dfl.validate()?;
        self.sgd().validate()?;
        self.sgd_finetune().validate()?;
        Ok(())
    }

    pub fn objective(&self) -> EstimatorObjective {
        match self.baseline {
            BaselineMode::Btcp => EstimatorObjective::Dfl {
                zero_density: false,
            },
            BaselineMode::TcpMse => EstimatorObjective::Dfl { zero_density: true },
            BaselineMode::Ohem => EstimatorObjective::Ohem {
                keep_fraction: self.ohem_keep_fraction,
            },
        }
    }

    pub fn sgd(&self) -> SgdConfig {
        SgdConfig {
            learning_rate: self.lr,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
        }
    }

    pub fn sgd_finetune(&self) -> SgdConfig {
        SgdConfig {
            learning_rate: self.lr_finetune,
            ..self.sgd()
        }
    }

    pub fn network_spec(&self, input_dim: usize, class_count: usize) -> NetworkSpec {
        NetworkSpec {
            input_dim,
            encoder_widths: self.encoder_widths.clone(),
            class_count,
            uncertainty_hidden: self.uncertainty_hidden.clone(),
        }
    }
}
