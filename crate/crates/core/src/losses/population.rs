use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Variances below this are treated as zero by [`auto_gamma`].
pub const ZERO_VARIANCE: f64 = 1e-12;

/// Closed interval `[lo, hi]` that auto-γ is clamped into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaClamp {
    pub lo: f64,
    pub hi: f64,
}

impl Default for GammaClamp {
    fn default() -> Self {
        Self { lo: 0.1, hi: 10.0 }
    }
}

impl GammaClamp {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()) {
            return Err(Error::Config(format!(
                "gamma clamp needs 0 < lo <= hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Sorted snapshot of target uncertainties with a neighborhood half-width.
///
/// The neighborhood of `u` is the closed window `[u − ε, u + ε]`. It is not
/// renormalized near 0 or 1, so scores close to the boundary see a
/// one-sided window.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyPopulation {
    scores: Vec<f64>,
    epsilon: f64,
}

impl UncertaintyPopulation {
    pub fn new(mut scores: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::Config(format!(
                "epsilon must be in (0, 0.5], got {epsilon}"
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(contract(format!("uncertainty score {bad} outside [0, 1]")));
        }
        scores.sort_by(f64::total_cmp);
        Ok(Self { scores, epsilon })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `|{s : |s − u| ≤ ε}| / |U|` by two binary searches.
    pub fn density(&self, u: f64) -> Result<f64> {
        if self.scores.is_empty() {
            return Err(contract("density of an empty population"));
        }
        let lo = u - self.epsilon;
        let hi = u + self.epsilon;
        let start = self.scores.partition_point(|&s| s < lo);
        let end = self.scores.partition_point(|&s| s <= hi);
        Ok(end.saturating_sub(start) as f64 / self.scores.len() as f64)
    }

    pub fn mean(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len() as f64
    }

    /// Population variance (1/N normalization).
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.scores
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / self.scores.len() as f64
    }
}

/// `γ = 1 / (12·var(U))` clamped into `clamp`; the upper bound when the
/// variance is (numerically) zero.
pub fn auto_gamma(pop: &UncertaintyPopulation, clamp: GammaClamp) -> Result<f64> {
    clamp.validate()?;
    if pop.len() < 2 {
        return Err(contract("auto gamma needs at least two scores"));
    }
    let var = pop.variance();
    if var < ZERO_VARIANCE {
        return Ok(clamp.hi);
    }
    Ok((1.0 / (12.0 * var)).clamp(clamp.lo, clamp.hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear_scan(scores: &[f64], u: f64, eps: f64) -> f64 {
        let hits = scores
            .iter()
            .filter(|&&s| s >= u - eps && s <= u + eps)
            .count();
        hits as f64 / scores.len() as f64
    }

    #[test]
    fn density_examples() {
        let pop = UncertaintyPopulation::new(vec![0.1, 0.1, 0.1, 0.9], 0.05).unwrap();
        assert_eq!(pop.density(0.1).unwrap(), 0.75);
        assert_eq!(pop.density(0.5).unwrap(), 0.0);
        let single = UncertaintyPopulation::new(vec![0.42], 0.01).unwrap();
        assert_eq!(single.density(0.42).unwrap(), 1.0);
        let empty = UncertaintyPopulation::new(vec![], 0.05).unwrap();
        assert!(empty.density(0.1).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(UncertaintyPopulation::new(vec![1.5], 0.05).is_err());
        assert!(UncertaintyPopulation::new(vec![0.5], 0.0).is_err());
        assert!(UncertaintyPopulation::new(vec![0.5], 0.6).is_err());
    }

    #[test]
    fn gamma_on_uniform_grid() {
        let n = 1000usize;
        let scores: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let pop = UncertaintyPopulation::new(scores, 0.05).unwrap();
        let nf = n as f64;
        assert!((pop.variance() - (nf * nf - 1.0) / (12.0 * nf * nf)).abs() < 1e-12);
        let gamma = auto_gamma(&pop, GammaClamp::default()).unwrap();
        assert!((gamma - nf * nf / (nf * nf - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn gamma_degenerate_cases() {
        let flat = UncertaintyPopulation::new(vec![0.3; 10], 0.05).unwrap();
        assert_eq!(auto_gamma(&flat, GammaClamp::default()).unwrap(), 10.0);
        let one = UncertaintyPopulation::new(vec![0.3], 0.05).unwrap();
        assert!(auto_gamma(&one, GammaClamp::default()).is_err());
        let bad = GammaClamp { lo: 0.0, hi: 1.0 };
        let pop = UncertaintyPopulation::new(vec![0.0, 1.0], 0.05).unwrap();
        assert!(auto_gamma(&pop, bad).is_err());
    }

    proptest! {
        #[test]
        fn density_matches_linear_scan(
            scores in proptest::collection::vec(0.0f64..=1.0, 1..200),
            u in 0.0f64..=1.0,
            eps in 0.001f64..=0.5,
        ) {
            let pop = UncertaintyPopulation::new(scores.clone(), eps).unwrap();
            prop_assert_eq!(pop.density(u).unwrap(), linear_scan(&scores, u, eps));
        }

        #[test]
        fn density_shrinks_with_epsilon(
            scores in proptest::collection::vec(0.0f64..=1.0, 1..100),
            u in 0.0f64..=1.0,
            eps in 0.002f64..=0.5,
            frac in 0.01f64..1.0,
        ) {
            let wide = UncertaintyPopulation::new(scores.clone(), eps).unwrap();
            let narrow = UncertaintyPopulation::new(scores, eps * frac).unwrap();
            prop_assert!(narrow.density(u).unwrap() <= wide.density(u).unwrap());
        }

        #[test]
        fn gamma_is_antitone_in_variance(
            scores in proptest::collection::vec(0.0f64..=1.0, 2..100),
            shrink in 0.05f64..0.95,
        ) {
            // Pulling every score toward the mean scales the variance by shrink².
            let pop = UncertaintyPopulation::new(scores.clone(), 0.05).unwrap();
            let mean = pop.mean();
            let tight: Vec<f64> = scores.iter().map(|s| mean + shrink * (s - mean)).collect();
            let tight = UncertaintyPopulation::new(tight, 0.05).unwrap();
            let wide_clamp = GammaClamp { lo: 1e-9, hi: 1e9 };
            prop_assume!(pop.variance() > 1e-6);
            prop_assert!(auto_gamma(&tight, wide_clamp).unwrap() > auto_gamma(&pop, wide_clamp).unwrap());
        }
    }
}
