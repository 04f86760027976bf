//! Audio front end: mono 44.1 kHz signals cut into 40 ms frames with a
//! 10 ms hop, each turned into a 91-value feature vector.

mod descriptors;
mod features;
mod spectrum;
mod wav;

pub use descriptors::{BaseDescriptors, BASE_COUNT, FLATNESS_BANDS};
pub use features::{
    base_descriptors, delta_features, feature_names, featurize_frame, flux, FeatureVector,
    Featurizer, FEATURE_COUNT,
};
pub use spectrum::{power_spectrum, PowerSpectrum, SpectrumAnalyzer};
pub use wav::{read_wav, write_wav};

use crate::error::{Error, Result};

pub const SAMPLE_RATE: u32 = 44_100;
/// 40 ms.
pub const FRAME_LEN: usize = 1764;
/// 10 ms.
pub const HOP_LEN: usize = 441;
/// 30 ms sub-frames used for deltas and flux.
pub const SUB_FRAME_LEN: usize = 1323;
pub const SUB_FRAME_OFFSET: usize = 441;

/// Floor applied inside logarithms and geometric means.
pub const EPSILON: f64 = 1e-12;

/// Mono samples in `[-1, 1]` at [`SAMPLE_RATE`].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>) -> Self {
        AudioSignal { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        SAMPLE_RATE
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / SAMPLE_RATE as f64
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64).sqrt()
}

/// A window of a signal starting at `start_time` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<'a> {
    pub samples: &'a [f64],
    pub start_time: f64,
}

impl<'a> Frame<'a> {
    pub fn new(samples: &'a [f64], start_time: f64) -> Self {
        Frame {
            samples,
            start_time,
        }
    }

    pub fn rms(&self) -> f64 {
        rms(self.samples)
    }
}

fn ms_to_samples(ms: f64) -> Result<usize> {
    let samples = ms * SAMPLE_RATE as f64 / 1000.0;
    if samples.is_nan() || samples < 1.0 || (samples - samples.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{ms} ms is not a whole number of samples"
        )));
    }
    Ok(samples.round() as usize)
}

/// Frames of `frame_ms` every `hop_ms`; a trailing partial frame is dropped.
pub fn frame_stream(signal: &AudioSignal, frame_ms: f64, hop_ms: f64) -> Result<Vec<Frame<'_>>> {
    let len = ms_to_samples(frame_ms)?;
    let hop = ms_to_samples(hop_ms)?;
    Ok(frames_of(signal.samples(), len, hop))
}

/// Standard 40 ms / 10 ms framing.
pub fn frames(signal: &AudioSignal) -> Vec<Frame<'_>> {
    frames_of(signal.samples(), FRAME_LEN, HOP_LEN)
}

fn frames_of(samples: &[f64], len: usize, hop: usize) -> Vec<Frame<'_>> {
    (0..)
        .map(|i| i * hop)
        .take_while(|&off| off + len <= samples.len())
        .map(|off| Frame::new(&samples[off..off + len], off as f64 / SAMPLE_RATE as f64))
        .collect()
}
