//! Model size and prediction speed.
//!
//! Speed is a real-time factor: seconds of audio divided by the seconds one
//! thread spends classifying it. Two figures are reported, one over
//! prediction alone (features precomputed) and one including featurization.
//! Audio decoding is never timed.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use crate::audio::{frames, AudioSignal, Featurizer, FeatureVector, HOP_LEN, SAMPLE_RATE};
use crate::error::Result;
use crate::ferns::{FernsModel, Mode, Precision};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub mode: Mode,
    pub depth: usize,
    pub ferns: usize,
    pub classes: usize,
    pub model_bytes: usize,
    pub frames: usize,
    pub audio_secs: f64,
    pub featurize_secs: f64,
    pub predict_secs: f64,
}

impl BenchRow {
    /// Real-time factor of prediction on precomputed features.
    pub fn predict_rtf(&self) -> f64 {
        self.audio_secs / self.predict_secs
    }

    /// Real-time factor including feature extraction.
    pub fn total_rtf(&self) -> f64 {
        self.audio_secs / (self.predict_secs + self.featurize_secs)
    }
}

/// Audio covered by `frames` analysis frames at the 10 ms hop.
pub fn frames_to_secs(frames: usize) -> f64 {
    (frames * HOP_LEN) as f64 / SAMPLE_RATE as f64
}

/// Featurizes every frame on the calling thread; returns vectors and seconds.
pub fn featurize_timed(featurizer: &Featurizer, signals: &[AudioSignal]) -> (Vec<FeatureVector>, f64) {
    let start = Instant::now();
    let features = signals
        .iter()
        .flat_map(|s| frames(s).into_iter().map(|f| featurizer.featurize(&f)).collect::<Vec<_>>())
        .collect();
    (features, start.elapsed().as_secs_f64())
}

/// Seconds one thread needs to predict every vector, best of `repeats`.
pub fn time_predictions(model: &FernsModel, features: &[&[f64]], repeats: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        for x in features {
            black_box(model.predict(black_box(x))?);
        }
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(best)
}

/// Benchmarks `model` on `signals` with f64 leaf storage.
pub fn bench_model(
    name: &str,
    model: &FernsModel,
    featurizer: &Featurizer,
    signals: &[AudioSignal],
) -> Result<BenchRow> {
    let audio_secs = signals.iter().map(AudioSignal::duration_secs).sum();
    let (features, featurize_secs) = featurize_timed(featurizer, signals);
    let views: Vec<&[f64]> = features.iter().map(|f| f.as_slice()).collect();
    let predict_secs = time_predictions(model, &views, 1)?;
    Ok(BenchRow {
        name: name.to_string(),
        mode: model.mode(),
        depth: model.depth(),
        ferns: model.ferns_per_ensemble(),
        classes: model.classes().len(),
        model_bytes: model.serialized_len(Precision::F64),
        frames: features.len(),
        audio_secs,
        featurize_secs,
        predict_secs,
    })
}

pub fn render(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<24} {:<10} {:>5} {:>6} {:>3} {:>14} {:>10} {:>12} {:>12}\n",
        "model", "mode", "depth", "ferns", "C", "bytes", "audio_s", "rtf_predict", "rtf_total"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<24} {:<10} {:>5} {:>6} {:>3} {:>14} {:>10.2} {:>11.1}x {:>11.1}x",
            r.name,
            r.mode.name(),
            r.depth,
            r.ferns,
            r.classes,
            r.model_bytes,
            r.audio_secs,
            r.predict_rtf(),
            r.total_rtf()
        );
    }
    out
}
