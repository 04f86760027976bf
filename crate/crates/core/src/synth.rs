//! Training data from isolated instrument recordings.
//!
//! Each example mixes one random 40 ms frame from each of 1–4 distinct
//! random instruments with independent weights in `(0, 1]`, renormalizes
//! the mix to unit RMS, and labels it with the instruments used.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::audio::{featurize_frame, read_wav, rms, AudioSignal, FeatureVector, Frame, FRAME_LEN, HOP_LEN};
use crate::error::{Error, Result};
use crate::ferns::{LabelSet, TrainingSet};
use crate::rng::substream;

/// Silence threshold, relative to the loudest 10 ms block.
pub const DEFAULT_TRIM_THRESHOLD: f64 = 0.01;
pub const MAX_POLYPHONY: usize = 4;
/// Examples in the full-size training set.
pub const PAPER_SCALE_EXAMPLES: usize = 100_000;

/// Drops leading and trailing 10 ms blocks whose RMS is below
/// `threshold × peak block RMS`.
pub fn trim_silence(signal: &AudioSignal, threshold: f64) -> Result<AudioSignal> {
    if signal.is_empty() {
        return Err(Error::SilentSignal);
    }
    let samples = signal.samples();
    let blocks: Vec<f64> = samples.chunks(HOP_LEN).map(rms).collect();
    let peak = blocks.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::SilentSignal);
    }
    let floor = threshold * peak;
    let loud = |b: &f64| *b >= floor;
    let first = blocks.iter().position(loud).unwrap_or(0);
    let last = blocks.iter().rposition(loud).unwrap_or(blocks.len() - 1);
    let end = ((last + 1) * HOP_LEN).min(samples.len());
    Ok(AudioSignal::new(samples[first * HOP_LEN..end].to_vec()))
}

/// Scales a signal to unit RMS.
pub fn rms_normalize(signal: &AudioSignal) -> Result<AudioSignal> {
    normalized(signal.samples()).map(AudioSignal::new)
}

fn normalized(samples: &[f64]) -> Result<Vec<f64>> {
    let r = rms(samples);
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::ZeroRms);
    }
    let scaled: Vec<f64> = samples.iter().map(|v| v / r).collect();
    // One correction pass brings the RMS to 1 within rounding.
    let r2 = rms(&scaled);
    Ok(scaled.into_iter().map(|v| v / r2).collect())
}

/// Isolated sounds per instrument, each trimmed and at unit RMS.
#[derive(Debug, Clone)]
pub struct InstrumentLibrary {
    names: Vec<String>,
    sounds: Vec<Vec<AudioSignal>>,
}

impl InstrumentLibrary {
    /// Trims and normalizes raw recordings. Sounds shorter than one frame
    /// after trimming are rejected.
    pub fn from_recordings(
        entries: Vec<(String, Vec<AudioSignal>)>,
        trim_threshold: f64,
    ) -> Result<Self> {
        let mut names = Vec::with_capacity(entries.len());
        let mut sounds = Vec::with_capacity(entries.len());
        for (name, raw) in entries {
            if names.contains(&name) {
                return Err(Error::InvalidLibrary(format!("duplicate instrument `{name}`")));
            }
            if raw.is_empty() {
                return Err(Error::InvalidLibrary(format!("instrument `{name}` has no sounds")));
            }
            let processed = raw
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let s = rms_normalize(&trim_silence(s, trim_threshold)?)?;
                    if s.len() < FRAME_LEN {
                        return Err(Error::InvalidLibrary(format!(
                            "sound {i} of `{name}` is shorter than one frame after trimming"
                        )));
                    }
                    Ok(s)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| match e {
                    Error::SilentSignal | Error::ZeroRms => {
                        Error::InvalidLibrary(format!("`{name}` contains a silent sound"))
                    }
                    other => other,
                })?;
            names.push(name);
            sounds.push(processed);
        }
        Ok(InstrumentLibrary { names, sounds })
    }

    /// Loads a manifest: one `<instrument> <wav path>` pair per line, `#`
    /// starts a comment, relative paths resolve against the manifest's
    /// directory. Instruments keep first-appearance order.
    pub fn load_manifest<P: AsRef<Path>>(path: P, trim_threshold: f64) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        let mut entries: Vec<(String, Vec<AudioSignal>)> = Vec::new();
        for (line_no, line) in fs::read_to_string(path)?.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, wav) = line
                .split_once(char::is_whitespace)
                .map(|(n, p)| (n, p.trim()))
                .filter(|(_, p)| !p.is_empty())
                .ok_or_else(|| {
                    Error::InvalidLibrary(format!("line {}: expected `<instrument> <path>`", line_no + 1))
                })?;
            let wav_path: PathBuf = base.join(wav);
            let signal = read_wav(&wav_path)?;
            match entries.iter_mut().find(|(n, _)| n == name) {
                Some((_, list)) => list.push(signal),
                None => entries.push((name.to_string(), vec![signal])),
            }
        }
        Self::from_recordings(entries, trim_threshold)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn sounds(&self, instrument: usize) -> &[AudioSignal] {
        &self.sounds[instrument]
    }
}

/// A synthesized mix before featurization.
#[derive(Debug, Clone, PartialEq)]
pub struct Mix {
    /// Unit-RMS mixed frame.
    pub samples: Vec<f64>,
    /// `(instrument, weight)` in draw order.
    pub weights: Vec<(usize, f64)>,
    /// `(sound index, sample offset)` of each source frame, in draw order.
    pub sources: Vec<(usize, usize)>,
}

impl Mix {
    pub fn labels(&self) -> LabelSet {
        self.weights.iter().map(|&(i, _)| i).collect()
    }
}

/// A featurized training example.
#[derive(Debug, Clone, PartialEq)]
pub struct MixExample {
    pub features: FeatureVector,
    pub labels: LabelSet,
    pub weights_used: Vec<(usize, f64)>,
}

/// Draws one mix of 1..=`max_polyphony` distinct instruments.
pub fn synthesize_mix<R: Rng + ?Sized>(
    rng: &mut R,
    library: &InstrumentLibrary,
    max_polyphony: usize,
) -> Result<Mix> {
    if max_polyphony == 0 {
        return Err(Error::InvalidParameter("polyphony must be at least 1".into()));
    }
    if library.len() < max_polyphony {
        return Err(Error::InvalidLibrary(format!(
            "{} instruments, polyphony up to {max_polyphony} requires as many",
            library.len()
        )));
    }
    let m = rng.gen_range(1..=max_polyphony);
    let instruments = index::sample(rng, library.len(), m).into_vec();
    let mut mixed = vec![0.0; FRAME_LEN];
    let mut weights = Vec::with_capacity(m);
    let mut sources = Vec::with_capacity(m);
    for instrument in instruments {
        let sounds = library.sounds(instrument);
        let sound = rng.gen_range(0..sounds.len());
        let samples = sounds[sound].samples();
        let offset = rng.gen_range(0..=samples.len() - FRAME_LEN);
        // gen::<f64>() is in [0, 1); flip it to (0, 1].
        let weight = 1.0 - rng.gen::<f64>();
        for (acc, s) in mixed.iter_mut().zip(&samples[offset..offset + FRAME_LEN]) {
            *acc += weight * s;
        }
        weights.push((instrument, weight));
        sources.push((sound, offset));
    }
    Ok(Mix {
        samples: normalized(&mixed)?,
        weights,
        sources,
    })
}

pub fn synthesize_example<R: Rng + ?Sized>(
    rng: &mut R,
    library: &InstrumentLibrary,
    max_polyphony: usize,
) -> Result<MixExample> {
    let mix = synthesize_mix(rng, library, max_polyphony)?;
    Ok(MixExample {
        features: featurize_frame(&Frame::new(&mix.samples, 0.0)),
        labels: mix.labels(),
        weights_used: mix.weights,
    })
}

/// `n` examples; example `i` draws from sub-stream `i` of `seed`, so the
/// result does not depend on thread count.
pub fn synthesize_examples(
    seed: u64,
    library: &InstrumentLibrary,
    n: usize,
    max_polyphony: usize,
) -> Result<Vec<MixExample>> {
    (0..n)
        .into_par_iter()
        .map(|i| synthesize_example(&mut substream(seed, i as u64), library, max_polyphony))
        .collect()
}

/// Training set of `n` synthesized mixes over the library's instruments, with
/// up to [`MAX_POLYPHONY`] instruments per mix (fewer for smaller libraries).
pub fn build_training_set(seed: u64, library: &InstrumentLibrary, n: usize) -> Result<TrainingSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("at least one example is required".into()));
    }
    let examples = synthesize_examples(seed, library, n, MAX_POLYPHONY.min(library.len()))?;
    to_training_set(library.names().to_vec(), &examples)
}

pub fn to_training_set(classes: Vec<String>, examples: &[MixExample]) -> Result<TrainingSet> {
    let width = examples.first().map(|e| e.features.0.len()).ok_or(Error::EmptyTrainingSet)?;
    let mut set = TrainingSet::new(classes, width)?;
    for e in examples {
        set.push(e.features.as_slice(), e.labels.clone())?;
    }
    Ok(set)
}
