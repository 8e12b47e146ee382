use super::UncertaintySample;
use crate::error::{Error, Result};

/// Probability that a random incorrect sample has strictly higher
/// uncertainty than a random correct one, ties counted ½ (Mann-Whitney U
/// over the two groups). `O(n log n)`.
///
/// Pair counts are accumulated as doubled integers so the result is the
/// exact ratio `2·pairs / (2·n_incorrect·n_correct)` rounded once.
pub fn auroc(samples: &[UncertaintySample]) -> Result<f64> {
    let n_incorrect = samples.iter().filter(|s| !s.correct).count() as u64;
    let n_correct = samples.len() as u64 - n_incorrect;
    if n_incorrect == 0 || n_correct == 0 {
        return Err(Error::UndefinedMetric {
            metric: "auroc",
            reason: "needs both correct and incorrect classifications",
        });
    }
    let mut sorted: Vec<&UncertaintySample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.u.total_cmp(&b.u));

    let mut twice_pairs: u128 = 0;
    let mut correct_below: u64 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut group_correct, mut group_incorrect) = (0u64, 0u64);
        while j < sorted.len() && sorted[j].u == sorted[i].u {
            if sorted[j].correct {
                group_correct += 1;
            } else {
                group_incorrect += 1;
            }
            j += 1;
        }
        twice_pairs += 2 * group_incorrect as u128 * correct_below as u128
            + group_incorrect as u128 * group_correct as u128;
        correct_below += group_correct;
        i = j;
    }
    Ok(twice_pairs as f64 / (2 * n_incorrect as u128 * n_correct as u128) as f64)
}
