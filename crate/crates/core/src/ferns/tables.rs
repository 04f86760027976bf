//! Leaf tables: per-leaf scores and score quotients from bag counts.
//!
//! With `a` the bag mass of class `y` in a leaf, `b` the bag mass in the
//! leaf, `c` the bag mass of class `y`, `n` the bag size and `C` the class
//! count:
//!
//! ```text
//! score    S = ln((1 + a) / (C + b)) + ln((C + n) / (1 + c))
//! quotient Q = ln((1 + a) / (1 + b - a)) + ln((1 + n - c) / (1 + c))
//! ```
//!
//! All masses count bag multiplicity.

use super::structure::feature_ranges;
use super::{leaf_slot, Bag, SplitCriterion, TrainingSet};
use crate::error::{Error, Result};

const POSITIVE: &[usize] = &[0];
const NEGATIVE: &[usize] = &[1];

/// The objects one ensemble is fitted on: a selection of rows of a
/// training set, each with the class indices it belongs to.
pub(crate) struct FitView<'a> {
    pub set: &'a TrainingSet,
    pub rows: Vec<usize>,
    pub labels: Vec<&'a [usize]>,
    pub classes: usize,
    pub ranges: Vec<(f64, f64)>,
    ln: Vec<f64>,
}

impl<'a> FitView<'a> {
    pub fn native(set: &'a TrainingSet) -> Self {
        let rows: Vec<usize> = (0..set.len()).collect();
        let labels = rows.iter().map(|&r| set.labels(r).as_slice()).collect();
        Self::build(set, rows, labels, set.class_count())
    }

    /// Two-class view: `positives` become class 0, `negatives` class 1.
    pub fn binary(set: &'a TrainingSet, positives: &[usize], negatives: &[usize]) -> Self {
        let rows: Vec<usize> = positives.iter().chain(negatives).copied().collect();
        let labels = std::iter::repeat_n(POSITIVE, positives.len())
            .chain(std::iter::repeat_n(NEGATIVE, negatives.len()))
            .collect();
        Self::build(set, rows, labels, 2)
    }

    fn build(set: &'a TrainingSet, rows: Vec<usize>, labels: Vec<&'a [usize]>, classes: usize) -> Self {
        let ranges = feature_ranges(set, &rows);
        // ln(k) for every integer a leaf table formula can take.
        let ln = (0..=rows.len() + classes + 1).map(|k| (k as f64).ln()).collect();
        FitView {
            set,
            rows,
            labels,
            classes,
            ranges,
            ln,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Bag masses of one fern, tallied per leaf and class.
pub(crate) struct LeafCounts {
    classes: usize,
    in_leaf: Vec<u64>,
    in_leaf_class: Vec<u64>,
    in_class: Vec<u64>,
    total: u64,
}

impl LeafCounts {
    pub fn tally(criteria: &[SplitCriterion], bag: &Bag, view: &FitView<'_>) -> Self {
        let leaves = 1usize << criteria.len();
        let classes = view.classes;
        let mut counts = LeafCounts {
            classes,
            in_leaf: vec![0; leaves],
            in_leaf_class: vec![0; leaves * classes],
            in_class: vec![0; classes],
            total: 0,
        };
        for (pos, &m) in bag.counts().iter().enumerate() {
            if m == 0 {
                continue;
            }
            let m = m as u64;
            let slot = leaf_slot(criteria, view.set.row(view.rows[pos]));
            counts.in_leaf[slot] += m;
            counts.total += m;
            for &y in view.labels[pos] {
                counts.in_leaf_class[slot * classes + y] += m;
                counts.in_class[y] += m;
            }
        }
        counts
    }

    fn leaves(&self) -> usize {
        self.in_leaf.len()
    }

    fn score_into(&self, ln: &[f64], out: &mut [f64], y: usize) {
        let c = self.classes as u64;
        let prior = ln[(c + self.total) as usize] - ln[(1 + self.in_class[y]) as usize];
        for (slot, v) in out.iter_mut().enumerate() {
            let a = self.in_leaf_class[slot * self.classes + y];
            let b = self.in_leaf[slot];
            *v = ln[(1 + a) as usize] - ln[(c + b) as usize] + prior;
        }
    }

    fn quotient_into(&self, ln: &[f64], out: &mut [f64], y: usize) {
        let cy = self.in_class[y];
        let prior = ln[(1 + self.total - cy) as usize] - ln[(1 + cy) as usize];
        for (slot, v) in out.iter_mut().enumerate() {
            let a = self.in_leaf_class[slot * self.classes + y];
            let b = self.in_leaf[slot];
            *v = ln[(1 + a) as usize] - ln[(1 + b - a) as usize] + prior;
        }
    }

    /// Leaf-major `2^D × C` table of scores.
    pub fn score_table(&self, view: &FitView<'_>) -> Vec<f64> {
        self.table(view, Self::score_into)
    }

    /// Leaf-major `2^D × C` table of score quotients.
    pub fn quotient_table(&self, view: &FitView<'_>) -> Vec<f64> {
        self.table(view, Self::quotient_into)
    }

    fn table(&self, view: &FitView<'_>, fill: fn(&Self, &[f64], &mut [f64], usize)) -> Vec<f64> {
        let leaves = self.leaves();
        let mut column = vec![0.0; leaves];
        let mut table = vec![0.0; leaves * self.classes];
        for y in 0..self.classes {
            fill(self, &view.ln, &mut column, y);
            for (slot, &v) in column.iter().enumerate() {
                table[slot * self.classes + y] = v;
            }
        }
        table
    }

    fn column(&self, view: &FitView<'_>, y: usize, fill: fn(&Self, &[f64], &mut [f64], usize)) -> Vec<f64> {
        let mut column = vec![0.0; self.leaves()];
        fill(self, &view.ln, &mut column, y);
        column
    }
}

fn check_inputs(
    criteria: &[SplitCriterion],
    bag: &Bag,
    training: &TrainingSet,
    class: usize,
) -> Result<()> {
    if criteria.is_empty() {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    if training.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if bag.counts().len() != training.len() {
        return Err(Error::InvalidParameter(format!(
            "bag spans {} objects, training set has {}",
            bag.counts().len(),
            training.len()
        )));
    }
    if class >= training.class_count() {
        return Err(Error::InvalidParameter(format!("class index {class} out of range")));
    }
    if let Some(c) = criteria
        .iter()
        .find(|c| c.feature_index >= training.feature_count())
    {
        return Err(Error::InvalidParameter(format!(
            "criterion references feature {}",
            c.feature_index
        )));
    }
    Ok(())
}

/// Per-leaf scores of `class` for a fern with the given structure and bag.
///
/// Returns `2^D` values indexed by 0-based leaf slot.
pub fn compute_scores(
    criteria: &[SplitCriterion],
    bag: &Bag,
    training: &TrainingSet,
    class: usize,
) -> Result<Vec<f64>> {
    check_inputs(criteria, bag, training, class)?;
    let view = FitView::native(training);
    let counts = LeafCounts::tally(criteria, bag, &view);
    Ok(counts.column(&view, class, LeafCounts::score_into))
}

/// Per-leaf score quotients of `class`; positive values indicate presence.
pub fn compute_score_quotients(
    criteria: &[SplitCriterion],
    bag: &Bag,
    training: &TrainingSet,
    class: usize,
) -> Result<Vec<f64>> {
    check_inputs(criteria, bag, training, class)?;
    let view = FitView::native(training);
    let counts = LeafCounts::tally(criteria, bag, &view);
    Ok(counts.column(&view, class, LeafCounts::quotient_into))
}
