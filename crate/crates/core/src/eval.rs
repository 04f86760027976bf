//! Frame-level evaluation with RMS-weighted precision and recall.
//!
//! For instrument `i`, the true-positive mass is the summed RMS of frames
//! both annotated and predicted as `i`; precision divides it by the mass of
//! frames predicted as `i`, recall by the mass of frames annotated as `i`.
//! Overall scores pool the masses of all instruments (micro-average).

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::audio::{frames, AudioSignal, Featurizer, FRAME_LEN, SAMPLE_RATE};
use crate::error::{Error, Result};
use crate::ferns::{FernsModel, LabelSet};

/// Tolerance when matching frame start times of two streams.
pub const TIME_TOLERANCE: f64 = 1e-6;

/// Labels of one frame with its loudness weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnnotation {
    pub start_time: f64,
    pub rms: f64,
    pub labels: LabelSet,
}

/// A time span annotated with the instruments sounding in it.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub labels: LabelSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub tp_mass: f64,
    pub predicted_mass: f64,
    pub annotated_mass: f64,
    /// Nothing was predicted, so precision is reported as 0.
    pub precision_undefined: bool,
    /// Nothing was annotated, so recall is reported as 0.
    pub recall_undefined: bool,
}

impl Scores {
    fn from_masses(tp: f64, predicted: f64, annotated: f64) -> Self {
        let ratio = |den: f64| if den > 0.0 { (tp / den).min(1.0) } else { 0.0 };
        let precision = ratio(predicted);
        let recall = ratio(annotated);
        Scores {
            precision,
            recall,
            f_score: f_score(precision, recall),
            tp_mass: tp,
            predicted_mass: predicted,
            annotated_mass: annotated,
            precision_undefined: predicted <= 0.0,
            recall_undefined: annotated <= 0.0,
        }
    }
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub per_instrument: Vec<Scores>,
    pub overall: Scores,
}

/// Scores `predictions` against `truth`; both streams must list the same
/// frame times in the same order. Weights come from `truth`.
pub fn rms_weighted_scores(
    predictions: &[FrameAnnotation],
    truth: &[FrameAnnotation],
    classes: &[String],
) -> Result<EvalReport> {
    if predictions.len() != truth.len() {
        let i = predictions.len().min(truth.len());
        let time = predictions.get(i).or(truth.get(i)).map_or(0.0, |a| a.start_time);
        return Err(Error::Misaligned {
            time,
            reason: format!("{} predicted frames vs {} annotated", predictions.len(), truth.len()),
        });
    }
    let c = classes.len();
    let mut tp = vec![0.0; c];
    let mut predicted = vec![0.0; c];
    let mut annotated = vec![0.0; c];
    for (p, t) in predictions.iter().zip(truth) {
        if (p.start_time - t.start_time).abs() > TIME_TOLERANCE {
            return Err(Error::Misaligned {
                time: t.start_time,
                reason: format!("prediction frame starts at {}", p.start_time),
            });
        }
        if t.rms < 0.0 || !t.rms.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "frame at {} has invalid rms {}",
                t.start_time, t.rms
            )));
        }
        for y in p.labels.iter().chain(t.labels.iter()) {
            if y >= c {
                return Err(Error::InvalidParameter(format!("class index {y} outside catalog")));
            }
        }
        for y in p.labels.iter() {
            predicted[y] += t.rms;
            if t.labels.contains(y) {
                tp[y] += t.rms;
            }
        }
        for y in t.labels.iter() {
            annotated[y] += t.rms;
        }
    }
    let per_instrument = (0..c)
        .map(|i| Scores::from_masses(tp[i], predicted[i], annotated[i]))
        .collect();
    let overall = Scores::from_masses(
        tp.iter().sum(),
        predicted.iter().sum(),
        annotated.iter().sum(),
    );
    Ok(EvalReport {
        classes: classes.to_vec(),
        per_instrument,
        overall,
    })
}

impl EvalReport {
    /// Aligned table, one row per instrument plus `overall`.
    pub fn to_text(&self) -> String {
        let width = self
            .classes
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(0)
            .max("instrument".len());
        let mut out = format!(
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>12}  {:>12}  {:>12}\n",
            "instrument", "precision", "recall", "f_score", "tp_mass", "pred_mass", "annot_mass"
        );
        let rows = self
            .classes
            .iter()
            .map(String::as_str)
            .zip(&self.per_instrument)
            .chain(std::iter::once(("overall", &self.overall)));
        for (name, s) in rows {
            let flag = match (s.precision_undefined, s.recall_undefined) {
                (true, true) => "  [no predictions, no annotations]",
                (true, false) => "  [no predictions]",
                (false, true) => "  [no annotations]",
                (false, false) => "",
            };
            let _ = writeln!(
                out,
                "{name:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>12.4}  {:>12.4}  {:>12.4}{flag}",
                s.precision, s.recall, s.f_score, s.tp_mass, s.predicted_mass, s.annotated_mass
            );
        }
        out
    }

    /// `key=value` lines, e.g. `overall.f_score=0.93`.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let rows = self
            .classes
            .iter()
            .map(String::as_str)
            .zip(&self.per_instrument)
            .chain(std::iter::once(("overall", &self.overall)));
        for (name, s) in rows {
            for (key, v) in [
                ("precision", s.precision),
                ("recall", s.recall),
                ("f_score", s.f_score),
                ("tp_mass", s.tp_mass),
                ("predicted_mass", s.predicted_mass),
                ("annotated_mass", s.annotated_mass),
            ] {
                let _ = writeln!(out, "{name}.{key}={v}");
            }
            let _ = writeln!(out, "{name}.precision_undefined={}", s.precision_undefined);
            let _ = writeln!(out, "{name}.recall_undefined={}", s.recall_undefined);
        }
        out
    }
}

/// Frame labels from segment annotations: a frame starting at `t` carries
/// instrument `i` when segments labeled `i` cover at least half of
/// `[t, t + frame_secs)`.
pub fn project_segments(segments: &[Segment], frame_starts: &[f64], frame_secs: f64) -> Vec<LabelSet> {
    let classes = segments
        .iter()
        .flat_map(|s| s.labels.iter())
        .max()
        .map_or(0, |m| m + 1);
    frame_starts
        .iter()
        .map(|&t0| {
            let t1 = t0 + frame_secs;
            (0..classes)
                .filter(|&i| {
                    let mut spans: Vec<(f64, f64)> = segments
                        .iter()
                        .filter(|s| s.labels.contains(i) && s.end > t0 && s.start < t1)
                        .map(|s| (s.start.max(t0), s.end.min(t1)))
                        .collect();
                    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut covered = 0.0;
                    let mut reach = t0;
                    for (a, b) in spans {
                        let a = a.max(reach);
                        if b > a {
                            covered += b - a;
                            reach = b;
                        }
                    }
                    covered >= 0.5 * frame_secs - 1e-12
                })
                .collect()
        })
        .collect()
}

/// Ground-truth frame stream for `signal`: RMS from the audio, labels
/// projected from `segments`.
pub fn truth_frames(signal: &AudioSignal, segments: &[Segment]) -> Vec<FrameAnnotation> {
    let frames = frames(signal);
    let starts: Vec<f64> = frames.iter().map(|f| f.start_time).collect();
    let labels = project_segments(segments, &starts, FRAME_LEN as f64 / SAMPLE_RATE as f64);
    frames
        .iter()
        .zip(labels)
        .map(|(f, labels)| FrameAnnotation {
            start_time: f.start_time,
            rms: f.rms(),
            labels,
        })
        .collect()
}

/// Predicts every 40 ms frame of `signal` (10 ms hop) with `model`.
pub fn annotate_recording(
    model: &FernsModel,
    featurizer: &Featurizer,
    signal: &AudioSignal,
) -> Result<Vec<FrameAnnotation>> {
    frames(signal)
        .par_iter()
        .map(|f| {
            let x = featurizer.featurize(f);
            Ok(FrameAnnotation {
                start_time: f.start_time,
                rms: f.rms(),
                labels: model.predict(x.as_slice())?,
            })
        })
        .collect()
}
