use crate::error::{contract, Error, Result};

/// Online hard-example mining over per-sample squared errors.
///
/// Keeps the `⌈keep_fraction·n⌉` largest errors (ties go to the lower
/// index) and returns their mean with the keep mask. Only kept samples carry
/// gradient.
pub fn ohem_regression_loss(sq_errors: &[f64], keep_fraction: f64) -> Result<(f64, Vec<bool>)> {
    if sq_errors.is_empty() {
        return Err(contract("OHEM over an empty batch"));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "keep fraction must be in (0, 1], got {keep_fraction}"
        )));
    }
    let n = sq_errors.len();
    let keep = ((keep_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the lower index first among equal errors.
    order.sort_by(|&a, &b| sq_errors[b].total_cmp(&sq_errors[a]));
    let mut mask = vec![false; n];
    let mut sum = 0.0;
    for &i in &order[..keep] {
        mask[i] = true;
    }
    // Sum in index order so the result does not depend on the sort.
    for (i, &e) in sq_errors.iter().enumerate() {
        if mask[i] {
            sum += e;
        }
    }
    Ok((sum / keep as f64, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keep_all_is_mse() {
        let errs = [0.1, 0.4, 0.25];
        let (loss, mask) = ohem_regression_loss(&errs, 1.0).unwrap();
        assert!((loss - 0.25).abs() < 1e-15);
        assert!(mask.iter().all(|&m| m));
    }

    #[test]
    fn keeps_hardest() {
        let (loss, mask) = ohem_regression_loss(&[0.1, 0.9], 0.5).unwrap();
        assert_eq!(loss, 0.9);
        assert_eq!(mask, vec![false, true]);
    }

    #[test]
    fn ties_prefer_low_index() {
        let (loss, mask) = ohem_regression_loss(&[0.3; 4], 0.5).unwrap();
        assert_eq!(loss, 0.3);
        assert_eq!(mask, vec![true, true, false, false]);
    }

    #[test]
    fn errors() {
        assert!(ohem_regression_loss(&[], 0.5).is_err());
        assert!(ohem_regression_loss(&[0.1], 0.0).is_err());
        assert!(ohem_regression_loss(&[0.1], 1.5).is_err());
    }
}
