use serde::{Deserialize, Serialize};

use super::population::{auto_gamma, GammaClamp, UncertaintyPopulation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum GammaMode {
    /// `1 / (12·var(U))`, clamped.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DflConfig {
    pub gamma: GammaMode,
    pub gamma_clamp: GammaClamp,
    /// Neighborhood half-width for the density factor.
    pub epsilon: f64,
    /// Always true: targets and densities are constants for the estimator.
    pub stop_gradient_target: bool,
}

impl Default for DflConfig {
    fn default() -> Self {
        Self {
            gamma: GammaMode::Auto,
            gamma_clamp: GammaClamp::default(),
            epsilon: 0.05,
            stop_gradient_target: true,
        }
    }
}

impl DflConfig {
    pub fn validate(&self) -> Result<()> {
        self.gamma_clamp.validate()?;
        if let GammaMode::Fixed(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::Config(format!("fixed gamma must be >= 0, got {g}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::Config(format!(
                "epsilon must be in (0, 0.5], got {}",
                self.epsilon
            )));
        }
        if !self.stop_gradient_target {
            return Err(Error::Config(
                "gradients through TCP targets are not supported".into(),
            ));
        }
        Ok(())
    }

    /// The exponent to use for a population snapshot.
    pub fn resolve_gamma(&self, pop: &UncertaintyPopulation) -> Result<f64> {
        match self.gamma {
            GammaMode::Fixed(g) => Ok(g),
            GammaMode::Auto => auto_gamma(pop, self.gamma_clamp),
        }
    }
}

/// `(1 − density)^γ · (û − u)²` and its derivative in `û`.
///
/// `0⁰` is taken as 1, so density 1 with γ = 0 keeps the plain squared error.
#[inline]
pub fn dfl_loss(u_hat: f64, u: f64, density: f64, gamma: f64) -> (f64, f64) {
    let weight = (1.0 - density).powf(gamma);
    let diff = u_hat - u;
    (weight * (diff * diff), 2.0 * weight * diff)
}
