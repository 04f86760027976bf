use std::sync::OnceLock;

use super::descriptors::{base_names, BaseDescriptors, DescriptorTables, BASE_COUNT};
use super::spectrum::{PowerSpectrum, SpectrumAnalyzer};
use super::{Frame, FRAME_LEN, SUB_FRAME_LEN, SUB_FRAME_OFFSET};

/// 45 base descriptors, their 45 sub-frame deltas, and flux.
pub const FEATURE_COUNT: usize = 2 * BASE_COUNT + 1;

/// Features of one 40 ms frame: `[base | deltas | flux]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn base(&self) -> &[f64] {
        &self.0[..BASE_COUNT]
    }

    pub fn deltas(&self) -> &[f64] {
        &self.0[BASE_COUNT..2 * BASE_COUNT]
    }

    pub fn flux(&self) -> f64 {
        self.0[FEATURE_COUNT - 1]
    }
}

/// Canonical column names, in feature-vector order.
pub fn feature_names() -> Vec<String> {
    let base = base_names();
    let deltas = base.iter().map(|n| format!("{n}_delta")).collect::<Vec<_>>();
    base.into_iter()
        .chain(deltas)
        .chain(std::iter::once("Flux".to_string()))
        .collect()
}

/// Immutable analysis tables for the 40 ms frame and its 30 ms sub-frames.
/// Shareable across threads.
#[derive(Debug)]
pub struct Featurizer {
    frame: Block,
    sub: Block,
}

struct Block {
    analyzer: SpectrumAnalyzer,
    tables: DescriptorTables,
}

impl std::fmt::Debug for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.analyzer.fmt(f)
    }
}

impl Block {
    fn new(len: usize) -> Self {
        Block {
            analyzer: SpectrumAnalyzer::new(len),
            tables: DescriptorTables::new(len),
        }
    }

    fn describe(&self, samples: &[f64]) -> (PowerSpectrum, BaseDescriptors) {
        let spectrum = self.analyzer.analyze(samples);
        let d = self.tables.compute(&spectrum, samples);
        (spectrum, d)
    }
}

impl Default for Featurizer {
    fn default() -> Self {
        Self::new()
    }
}

fn check_frame(frame: &Frame<'_>) {
    assert_eq!(
        frame.samples.len(),
        FRAME_LEN,
        "features are defined on {FRAME_LEN}-sample frames"
    );
}

impl Featurizer {
    pub fn new() -> Self {
        Featurizer {
            frame: Block::new(FRAME_LEN),
            sub: Block::new(SUB_FRAME_LEN),
        }
    }

    fn sub_frames<'a>(frame: &Frame<'a>) -> (&'a [f64], &'a [f64]) {
        (
            &frame.samples[..SUB_FRAME_LEN],
            &frame.samples[SUB_FRAME_OFFSET..SUB_FRAME_OFFSET + SUB_FRAME_LEN],
        )
    }

    pub fn power_spectrum(&self, frame: &Frame<'_>) -> PowerSpectrum {
        check_frame(frame);
        self.frame.analyzer.analyze(frame.samples)
    }

    pub fn base_descriptors(&self, spectrum: &PowerSpectrum, frame: &Frame<'_>) -> BaseDescriptors {
        check_frame(frame);
        self.frame.tables.compute(spectrum, frame.samples)
    }

    /// Descriptors of the later sub-frame minus those of the earlier one.
    pub fn delta_features(&self, frame: &Frame<'_>) -> [f64; BASE_COUNT] {
        check_frame(frame);
        let (a, b) = Self::sub_frames(frame);
        let (_, da) = self.sub.describe(a);
        let (_, db) = self.sub.describe(b);
        diff(&db.to_array(), &da.to_array())
    }

    /// Sum of squared differences of sub-frame DFT magnitudes.
    pub fn flux(&self, frame: &Frame<'_>) -> f64 {
        check_frame(frame);
        let (a, b) = Self::sub_frames(frame);
        flux_between(&self.sub.analyzer.analyze(a), &self.sub.analyzer.analyze(b))
    }

    pub fn featurize(&self, frame: &Frame<'_>) -> FeatureVector {
        check_frame(frame);
        let (_, base) = self.frame.describe(frame.samples);
        let (a, b) = Self::sub_frames(frame);
        let (sa, da) = self.sub.describe(a);
        let (sb, db) = self.sub.describe(b);
        let mut out = [0.0; FEATURE_COUNT];
        out[..BASE_COUNT].copy_from_slice(&base.to_array());
        out[BASE_COUNT..2 * BASE_COUNT].copy_from_slice(&diff(&db.to_array(), &da.to_array()));
        out[FEATURE_COUNT - 1] = flux_between(&sa, &sb);
        FeatureVector(out)
    }

    /// Featurizes a batch of 1764-sample blocks, in parallel.
    pub fn featurize_all(&self, frames: &[Frame<'_>]) -> Vec<FeatureVector> {
        use rayon::prelude::*;
        frames.par_iter().map(|f| self.featurize(f)).collect()
    }
}

fn diff(later: &[f64; BASE_COUNT], earlier: &[f64; BASE_COUNT]) -> [f64; BASE_COUNT] {
    let mut out = [0.0; BASE_COUNT];
    for ((o, b), a) in out.iter_mut().zip(later).zip(earlier) {
        *o = b - a;
    }
    out
}

fn flux_between(a: &PowerSpectrum, b: &PowerSpectrum) -> f64 {
    a.magnitude
        .iter()
        .zip(&b.magnitude)
        .map(|(x, y)| (y - x).powi(2))
        .sum()
}

fn shared() -> &'static Featurizer {
    static FEATURIZER: OnceLock<Featurizer> = OnceLock::new();
    FEATURIZER.get_or_init(Featurizer::new)
}

/// Base descriptors of a 40 ms frame given its spectrum.
pub fn base_descriptors(spectrum: &PowerSpectrum, frame: &Frame<'_>) -> BaseDescriptors {
    shared().base_descriptors(spectrum, frame)
}

pub fn delta_features(frame: &Frame<'_>) -> [f64; BASE_COUNT] {
    shared().delta_features(frame)
}

pub fn flux(frame: &Frame<'_>) -> f64 {
    shared().flux(frame)
}

pub fn featurize_frame(frame: &Frame<'_>) -> FeatureVector {
    shared().featurize(frame)
}
