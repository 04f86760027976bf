//! Random ferns: fixed-depth trees whose levels share one random split.
//!
//! Two training modes are supported. [`train_multilabel`] builds one
//! ensemble whose leaves hold score quotients for every class at once, so a
//! class is reported whenever its summed quotient is positive.
//! [`train_battery`] builds the binary-relevance baseline: one two-class
//! ensemble per label, each trained on a balanced subsample.
//! [`train_single_label`] fills leaves with plain scores for argmax
//! prediction.

mod io;
mod model;
mod structure;
mod tables;
mod train;

pub use io::Precision;
pub use model::{FernsModel, Mode};
pub use structure::{build_fern_structure, leaf_index, make_bag};
pub use tables::{compute_score_quotients, compute_scores};
pub use train::{
    train_battery, train_multilabel, train_single_label, TrainParams, DEFAULT_DEPTH,
    DEFAULT_FERNS, DEFAULT_PER_CLASS_CAP,
};

use crate::error::{Error, Result};

/// One random split: `x[feature_index] > threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCriterion {
    pub feature_index: usize,
    pub threshold: f64,
}

impl SplitCriterion {
    #[inline]
    pub fn fires(&self, x: &[f64]) -> bool {
        x[self.feature_index] > self.threshold
    }
}

/// A fern: `D` split criteria and a `2^D × columns` leaf table stored
/// leaf-major, so the values of all classes for one leaf are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Fern {
    criteria: Vec<SplitCriterion>,
    columns: usize,
    leaves: Vec<f64>,
}

impl Fern {
    pub(crate) fn new(criteria: Vec<SplitCriterion>, columns: usize, leaves: Vec<f64>) -> Self {
        debug_assert_eq!(leaves.len(), (1usize << criteria.len()) * columns);
        Fern {
            criteria,
            columns,
            leaves,
        }
    }

    pub fn depth(&self) -> usize {
        self.criteria.len()
    }

    pub fn criteria(&self) -> &[SplitCriterion] {
        &self.criteria
    }

    /// Number of values per leaf.
    pub fn columns(&self) -> usize {
        self.columns
    }

    /// The whole leaf table, leaf-major.
    pub fn leaf_values(&self) -> &[f64] {
        &self.leaves
    }

    /// Values stored in the leaf with 0-based slot `slot`.
    #[inline]
    pub fn leaf_row(&self, slot: usize) -> &[f64] {
        &self.leaves[slot * self.columns..(slot + 1) * self.columns]
    }

    /// 0-based leaf slot of `x`; the caller guarantees `x` is long enough.
    #[inline]
    pub(crate) fn slot(&self, x: &[f64]) -> usize {
        leaf_slot(&self.criteria, x)
    }
}

#[inline]
pub(crate) fn leaf_slot(criteria: &[SplitCriterion], x: &[f64]) -> usize {
    criteria
        .iter()
        .enumerate()
        .fold(0usize, |acc, (i, c)| acc | ((c.fires(x) as usize) << i))
}

/// A bootstrap bag: multiplicity of every training object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bag {
    counts: Vec<u32>,
}

impl Bag {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        Bag { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Total multiplicity, equal to the size of the set the bag was drawn from.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// A set of class indices into a catalog, kept sorted and duplicate-free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LabelSet(Vec<usize>);

impl LabelSet {
    pub fn new<I: IntoIterator<Item = usize>>(classes: I) -> Self {
        let mut v: Vec<usize> = classes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        LabelSet(v)
    }

    pub fn empty() -> Self {
        LabelSet(Vec::new())
    }

    pub fn contains(&self, class: usize) -> bool {
        self.0.binary_search(&class).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Resolves names against `catalog`; unknown names are an error.
    pub fn from_names<S: AsRef<str>>(names: &[S], catalog: &[String]) -> Result<Self> {
        names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                catalog
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown class `{n}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(LabelSet::new)
    }

    pub fn names<'a>(&self, catalog: &'a [String]) -> Vec<&'a str> {
        self.0.iter().map(|&i| catalog[i].as_str()).collect()
    }
}

impl FromIterator<usize> for LabelSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        LabelSet::new(iter)
    }
}

/// Labeled feature vectors over a fixed class catalog.
///
/// Features are stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    classes: Vec<String>,
    feature_count: usize,
    features: Vec<f64>,
    labels: Vec<LabelSet>,
}

impl TrainingSet {
    pub fn new(classes: Vec<String>, feature_count: usize) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidTrainingSet("class catalog is empty".into()));
        }
        for (i, c) in classes.iter().enumerate() {
            if classes[..i].contains(c) {
                return Err(Error::InvalidTrainingSet(format!("duplicate class `{c}`")));
            }
        }
        if feature_count == 0 {
            return Err(Error::InvalidTrainingSet("zero features".into()));
        }
        Ok(TrainingSet {
            classes,
            feature_count,
            features: Vec::new(),
            labels: Vec::new(),
        })
    }

    /// Builds a set from `(features, labels)` pairs; the feature count is
    /// taken from the first object.
    pub fn from_objects(classes: Vec<String>, objects: Vec<(Vec<f64>, LabelSet)>) -> Result<Self> {
        let width = objects.first().map(|(x, _)| x.len()).ok_or(Error::EmptyTrainingSet)?;
        let mut set = TrainingSet::new(classes, width)?;
        set.features.reserve(width * objects.len());
        for (x, y) in objects {
            set.push(&x, y)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, features: &[f64], labels: LabelSet) -> Result<()> {
        if features.len() != self.feature_count {
            return Err(Error::FeatureLength {
                expected: self.feature_count,
                got: features.len(),
            });
        }
        if let Some(j) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTrainingSet(format!(
                "object {} has a non-finite value in feature {j}",
                self.labels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidTrainingSet(format!(
                "object {} has an empty label set",
                self.labels.len()
            )));
        }
        if labels.iter().any(|c| c >= self.classes.len()) {
            return Err(Error::InvalidTrainingSet(format!(
                "object {} references a class outside the catalog",
                self.labels.len()
            )));
        }
        self.features.extend_from_slice(features);
        self.labels.push(labels);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_count..(i + 1) * self.feature_count]
    }

    pub fn labels(&self, i: usize) -> &LabelSet {
        &self.labels[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &LabelSet)> + '_ {
        self.features
            .chunks_exact(self.feature_count)
            .zip(self.labels.iter())
    }
}
