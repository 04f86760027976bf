use rand::seq::index;
use rayon::prelude::*;

use super::structure::{draw_structure, make_bag};
use super::tables::{FitView, LeafCounts};
use super::{Fern, FernsModel, Mode, TrainingSet};
use crate::error::{Error, Result};
use crate::rng::{battery_fern_stream, battery_subsample_stream, fern_stream, substream};

pub const DEFAULT_FERNS: usize = 1000;
pub const DEFAULT_DEPTH: usize = 10;
pub const DEFAULT_PER_CLASS_CAP: usize = 3000;

/// Deepest fern accepted; a depth-24 fern already has 16M leaves.
pub const MAX_DEPTH: usize = 24;

/// Ensemble hyperparameters shared by all training modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainParams {
    pub ferns: usize,
    pub depth: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            ferns: DEFAULT_FERNS,
            depth: DEFAULT_DEPTH,
            seed: 0,
        }
    }
}

impl TrainParams {
    pub fn new(ferns: usize, depth: usize, seed: u64) -> Self {
        TrainParams { ferns, depth, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.ferns == 0 {
            return Err(Error::InvalidParameter("at least one fern is required".into()));
        }
        if self.ferns >= u32::MAX as usize {
            return Err(Error::InvalidParameter("too many ferns".into()));
        }
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "depth must be in 1..={MAX_DEPTH}, got {}",
                self.depth
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Table {
    Scores,
    Quotients,
}

/// Fits `params.ferns` ferns on `view`; fern `k` draws from stream `stream(k)`.
fn fit_ensemble(
    view: &FitView<'_>,
    params: &TrainParams,
    table: Table,
    stream: impl Fn(usize) -> u64 + Sync,
) -> Result<Vec<Fern>> {
    if view.len() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    (0..params.ferns)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(params.seed, stream(k));
            let criteria = draw_structure(&mut rng, &view.ranges, params.depth);
            let bag = make_bag(&mut rng, view.len())?;
            let counts = LeafCounts::tally(&criteria, &bag, view);
            let leaves = match table {
                Table::Scores => counts.score_table(view),
                Table::Quotients => counts.quotient_table(view),
            };
            Ok(Fern::new(criteria, view.classes, leaves))
        })
        .collect()
}

/// Trains a native multi-label ensemble: every fern holds a `2^D × C` table
/// of score quotients over one shared structure and bag.
pub fn train_multilabel(training: &TrainingSet, params: TrainParams) -> Result<FernsModel> {
    params.validate()?;
    let view = FitView::native(training);
    let ferns = fit_ensemble(&view, &params, Table::Quotients, fern_stream)?;
    Ok(FernsModel::from_parts(Mode::MultiLabel, training, params, ferns))
}

/// Trains a classic single-label ensemble with score tables, for argmax
/// prediction.
pub fn train_single_label(training: &TrainingSet, params: TrainParams) -> Result<FernsModel> {
    params.validate()?;
    let view = FitView::native(training);
    let ferns = fit_ensemble(&view, &params, Table::Scores, fern_stream)?;
    Ok(FernsModel::from_parts(Mode::SingleLabel, training, params, ferns))
}

/// Trains the binary-relevance battery: for each class, a two-class score
/// ensemble over a balanced subsample of at most `per_class_cap` positives
/// and as many negatives.
pub fn train_battery(
    training: &TrainingSet,
    params: TrainParams,
    per_class_cap: usize,
) -> Result<FernsModel> {
    params.validate()?;
    if per_class_cap == 0 {
        return Err(Error::InvalidParameter("per-class cap must be at least 1".into()));
    }
    if training.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut ferns = Vec::with_capacity(training.class_count() * params.ferns);
    for class in 0..training.class_count() {
        let (positives, negatives) = balanced_split(training, class, per_class_cap, params.seed)?;
        let view = FitView::binary(training, &positives, &negatives);
        ferns.extend(fit_ensemble(&view, &params, Table::Scores, |k| {
            battery_fern_stream(class, k)
        })?);
    }
    Ok(FernsModel::from_parts(Mode::Battery, training, params, ferns))
}

/// Balanced positive/negative row subsample for one battery class.
pub(crate) fn balanced_split(
    training: &TrainingSet,
    class: usize,
    cap: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let (positives, negatives): (Vec<usize>, Vec<usize>) =
        (0..training.len()).partition(|&i| training.labels(i).contains(class));
    let name = &training.classes()[class];
    if positives.is_empty() {
        return Err(Error::OneSidedClass {
            class: name.clone(),
            side: "positive",
        });
    }
    if negatives.is_empty() {
        return Err(Error::OneSidedClass {
            class: name.clone(),
            side: "negative",
        });
    }
    let take = cap.min(positives.len()).min(negatives.len());
    let mut rng = substream(seed, battery_subsample_stream(class));
    let mut pick = |rows: &[usize]| {
        let mut chosen: Vec<usize> = index::sample(&mut rng, rows.len(), take)
            .into_iter()
            .map(|i| rows[i])
            .collect();
        chosen.sort_unstable();
        chosen
    };
    let positives = pick(&positives);
    let negatives = pick(&negatives);
    Ok((positives, negatives))
}
