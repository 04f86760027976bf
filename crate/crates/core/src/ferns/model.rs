use std::fmt;

use super::{Fern, LabelSet, TrainParams, TrainingSet};
use crate::error::{Error, Result};

/// How a model's leaf tables are laid out and read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// One ensemble, `C` score quotients per leaf; a class is present when
    /// its summed quotient is positive.
    MultiLabel,
    /// `C` two-class ensembles of score tables (class, not-class).
    Battery,
    /// One ensemble, `C` scores per leaf; argmax prediction.
    SingleLabel,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::MultiLabel => "multilabel",
            Mode::Battery => "battery",
            Mode::SingleLabel => "single",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A trained ferns ensemble. Immutable once built, so it can be shared
/// across prediction threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FernsModel {
    pub(super) mode: Mode,
    pub(super) classes: Vec<String>,
    pub(super) depth: usize,
    pub(super) ferns_per_ensemble: usize,
    pub(super) feature_count: usize,
    pub(super) seed: u64,
    /// Battery ferns are stored class-major: class `c` owns
    /// `ferns[c * K..(c + 1) * K]`.
    pub(super) ferns: Vec<Fern>,
}

impl FernsModel {
    pub(super) fn from_parts(
        mode: Mode,
        training: &TrainingSet,
        params: TrainParams,
        ferns: Vec<Fern>,
    ) -> Self {
        FernsModel {
            mode,
            classes: training.classes().to_vec(),
            depth: params.depth,
            ferns_per_ensemble: params.ferns,
            feature_count: training.feature_count(),
            seed: params.seed,
            ferns,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `K`: ferns per ensemble (per class in battery mode).
    pub fn ferns_per_ensemble(&self) -> usize {
        self.ferns_per_ensemble
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ferns(&self) -> &[Fern] {
        &self.ferns
    }

    /// Total number of stored leaf values.
    pub fn leaf_value_count(&self) -> usize {
        self.ferns.iter().map(|f| f.leaf_values().len()).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_count {
            return Err(Error::FeatureLength {
                expected: self.feature_count,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn require(&self, mode: Mode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::WrongMode {
                required: mode.name(),
                actual: self.mode.name(),
            });
        }
        Ok(())
    }

    /// Per-class decision values for `x`.
    ///
    /// Multi-label: summed quotients. Single-label: summed scores. Battery:
    /// per-class margins `Σ_k S_k(x, y) - S_k(x, not-y)`.
    pub fn class_sums(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let classes = self.classes.len();
        let sums = match self.mode {
            Mode::MultiLabel | Mode::SingleLabel => {
                let mut sums = vec![0.0; classes];
                for fern in &self.ferns {
                    let row = fern.leaf_row(fern.slot(x));
                    for (s, v) in sums.iter_mut().zip(row) {
                        *s += v;
                    }
                }
                sums
            }
            Mode::Battery => self
                .ferns
                .chunks_exact(self.ferns_per_ensemble)
                .map(|ensemble| {
                    ensemble
                        .iter()
                        .map(|fern| {
                            let row = fern.leaf_row(fern.slot(x));
                            row[0] - row[1]
                        })
                        .sum()
                })
                .collect(),
        };
        Ok(sums)
    }

    /// Classes whose summed score quotient is strictly positive.
    pub fn predict_multilabel(&self, x: &[f64]) -> Result<LabelSet> {
        self.require(Mode::MultiLabel)?;
        Ok(positive(&self.class_sums(x)?))
    }

    /// Classes whose binary sub-ensemble margin is strictly positive.
    pub fn predict_battery(&self, x: &[f64]) -> Result<LabelSet> {
        self.require(Mode::Battery)?;
        Ok(positive(&self.class_sums(x)?))
    }

    /// Argmax of summed scores; ties go to the lowest catalog index.
    pub fn predict_single(&self, x: &[f64]) -> Result<usize> {
        self.require(Mode::SingleLabel)?;
        let sums = self.class_sums(x)?;
        let mut best = 0;
        for (i, &s) in sums.iter().enumerate().skip(1) {
            if s > sums[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Label set predicted for `x` under the model's own mode.
    pub fn predict(&self, x: &[f64]) -> Result<LabelSet> {
        match self.mode {
            Mode::MultiLabel => self.predict_multilabel(x),
            Mode::Battery => self.predict_battery(x),
            Mode::SingleLabel => self.predict_single(x).map(|c| LabelSet::new([c])),
        }
    }
}

fn positive(sums: &[f64]) -> LabelSet {
    sums.iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(i, _)| i)
        .collect()
}
