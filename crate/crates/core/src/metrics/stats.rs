use crate::error::{contract, Result};

pub fn avg_uncertainty(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(contract("average of an empty score list"));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Mean and population standard deviation (1/N normalization).
pub fn distribution_stats(scores: &[f64]) -> Result<(f64, f64)> {
    let mean = avg_uncertainty(scores)?;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / scores.len() as f64;
    Ok((mean, var.sqrt()))
}

/// Equal-width bin counts over [0, 1]; a score of exactly 1 lands in the
/// last bin.
pub fn histogram(scores: &[f64], bins: usize) -> Result<Vec<usize>> {
    if bins == 0 {
        return Err(contract("histogram needs at least one bin"));
    }
    let mut counts = vec![0usize; bins];
    for &s in scores {
        if !(0.0..=1.0).contains(&s) {
            return Err(contract(format!("score {s} outside [0, 1]")));
        }
        let idx = ((s * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Balanced accuracy of flagging OOD samples by `u ≥ τ`:
/// `½·[share of in-distribution with u < τ + share of OOD with u ≥ τ]`.
pub fn ood_detection_accuracy(in_scores: &[f64], ood_scores: &[f64], tau: f64) -> Result<f64> {
    if in_scores.is_empty() || ood_scores.is_empty() {
        return Err(contract("OOD accuracy needs both score sets"));
    }
    let kept = in_scores.iter().filter(|&&u| u < tau).count() as f64 / in_scores.len() as f64;
    let flagged = ood_scores.iter().filter(|&&u| u >= tau).count() as f64 / ood_scores.len() as f64;
    Ok(0.5 * (kept + flagged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn neumaier_sum(xs: &[f64]) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for &x in xs {
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    #[test]
    fn averages() {
        assert_eq!(avg_uncertainty(&[0.5; 9]).unwrap(), 0.5);
        assert_eq!(avg_uncertainty(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(avg_uncertainty(&[]).is_err());
        let mut rng = crate::nn::XorShift64Star::new(4);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.next_f64()).collect();
        let oracle = neumaier_sum(&xs) / xs.len() as f64;
        assert!((avg_uncertainty(&xs).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn stats() {
        assert_eq!(distribution_stats(&[0.3; 5]).unwrap().1, 0.0);
        assert_eq!(distribution_stats(&[0.0, 1.0]).unwrap(), (0.5, 0.5));
        let n = 1000usize;
        let grid: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let nf = n as f64;
        let expect = ((nf * nf - 1.0) / 12.0).sqrt() / nf;
        assert!((distribution_stats(&grid).unwrap().1 - expect).abs() < 1e-12);
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(histogram(&[0.0, 1.0], 2).unwrap(), vec![1, 1]);
        let n = 1000usize;
        let grid: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        for c in histogram(&grid, 50).unwrap() {
            assert!((c as i64 - (n / 50) as i64).abs() <= 1);
        }
        let h = histogram(&[0.01, 0.02], 10).unwrap();
        assert_eq!(h[0], 2);
        assert!(h[1..].iter().all(|&c| c == 0));
        assert!(histogram(&[1.2], 5).is_err());
        assert!(histogram(&[0.2], 0).is_err());
    }

    #[test]
    fn ood_accuracy() {
        assert_eq!(
            ood_detection_accuracy(&[0.0; 4], &[1.0; 3], 0.5).unwrap(),
            1.0
        );
        let s = [0.1, 0.4, 0.6, 0.9];
        assert_eq!(ood_detection_accuracy(&s, &s, 0.5).unwrap(), 0.5);
        // in: 2 of 3 below τ; ood: 1 of 4 at or above τ
        let v = ood_detection_accuracy(&[0.1, 0.2, 0.7], &[0.1, 0.3, 0.49, 0.5], 0.5).unwrap();
        assert!((v - 0.5 * (2.0 / 3.0 + 0.25)).abs() < 1e-15);
        assert!(ood_detection_accuracy(&[], &[0.1], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn histogram_counts_everything(
            scores in proptest::collection::vec(0.0f64..=1.0, 0..300),
            bins in 1usize..80,
        ) {
            let h = histogram(&scores, bins).unwrap();
            prop_assert_eq!(h.len(), bins);
            prop_assert_eq!(h.iter().sum::<usize>(), scores.len());
        }
    }
}
