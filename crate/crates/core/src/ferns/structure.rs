use rand::Rng;

use super::{leaf_slot, Bag, SplitCriterion, TrainingSet};
use crate::error::{Error, Result};

/// Draws `depth` random split criteria.
///
/// Each criterion picks a feature uniformly and a threshold uniformly from
/// the closed range of that feature's values over `training`.
pub fn build_fern_structure<R: Rng + ?Sized>(
    rng: &mut R,
    training: &TrainingSet,
    depth: usize,
) -> Result<Vec<SplitCriterion>> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if training.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let rows: Vec<usize> = (0..training.len()).collect();
    let ranges = feature_ranges(training, &rows);
    Ok(draw_structure(rng, &ranges, depth))
}

/// Observed `[min, max]` of every feature over the given rows.
pub(crate) fn feature_ranges(training: &TrainingSet, rows: &[usize]) -> Vec<(f64, f64)> {
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); training.feature_count()];
    for &r in rows {
        for (range, &v) in ranges.iter_mut().zip(training.row(r)) {
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    ranges
}

pub(crate) fn draw_structure<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &[(f64, f64)],
    depth: usize,
) -> Vec<SplitCriterion> {
    (0..depth)
        .map(|_| {
            let feature_index = rng.gen_range(0..ranges.len());
            let (lo, hi) = ranges[feature_index];
            let threshold = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
            SplitCriterion {
                feature_index,
                threshold,
            }
        })
        .collect()
}

/// 1-based leaf number `1 + Σ 2^(i-1) σ_i(x)` of `x`.
pub fn leaf_index(criteria: &[SplitCriterion], x: &[f64]) -> Result<usize> {
    if let Some(c) = criteria.iter().find(|c| c.feature_index >= x.len()) {
        return Err(Error::FeatureLength {
            expected: c.feature_index + 1,
            got: x.len(),
        });
    }
    Ok(1 + leaf_slot(criteria, x))
}

/// Samples `n` indices from `0..n` with replacement.
pub fn make_bag<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Bag> {
    if n == 0 {
        return Err(Error::InvalidParameter("bag over an empty set".into()));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter("training set too large".into()));
    }
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.gen_range(0..n)] += 1;
    }
    Ok(Bag::from_counts(counts))
}
