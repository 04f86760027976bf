//! Fixtures shared by the integration suites: synthetic instrument
//! families, polyphonic test tracks, and brute-force leaf-table oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use mlferns::audio::{AudioSignal, SAMPLE_RATE};
use mlferns::eval::Segment;
use mlferns::ferns::{Bag, LabelSet, SplitCriterion, TrainingSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SR: f64 = SAMPLE_RATE as f64;

/// A waveform family standing in for one instrument.
#[derive(Debug, Clone, Copy)]
pub enum Family {
    /// Near-sine with a weak second harmonic and breath noise.
    Flute,
    /// Odd harmonics only.
    Clarinet,
    /// All harmonics at 1/n: a sawtooth.
    Brass,
    /// Low plucked string with fast exponential decay.
    Bass,
    /// Sawtooth with vibrato.
    Violin,
    /// Octave-spaced partials.
    Organ,
    /// Inharmonic partials with slow decay.
    Bell,
    /// Band-limited noise bursts.
    Shaker,
}

pub const FAMILIES: [Family; 8] = [
    Family::Flute,
    Family::Clarinet,
    Family::Brass,
    Family::Bass,
    Family::Violin,
    Family::Organ,
    Family::Bell,
    Family::Shaker,
];

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Flute => "flute",
            Family::Clarinet => "clarinet",
            Family::Brass => "brass",
            Family::Bass => "bass",
            Family::Violin => "violin",
            Family::Organ => "organ",
            Family::Bell => "bell",
            Family::Shaker => "shaker",
        }
    }

    fn pitch_range(self) -> (f64, f64) {
        match self {
            Family::Flute => (500.0, 1500.0),
            Family::Clarinet => (150.0, 700.0),
            Family::Brass => (200.0, 800.0),
            Family::Bass => (45.0, 180.0),
            Family::Violin => (200.0, 1200.0),
            Family::Organ => (100.0, 500.0),
            Family::Bell => (300.0, 1000.0),
            Family::Shaker => (1.0, 1.0),
        }
    }

    /// `(frequency ratio, amplitude)` of the partials.
    fn partials(self) -> Vec<(f64, f64)> {
        let harmonic = |amp: fn(f64) -> f64, step: usize| -> Vec<(f64, f64)> {
            (1..=40).step_by(step).map(|n| (n as f64, amp(n as f64))).collect()
        };
        match self {
            Family::Flute => vec![(1.0, 1.0), (2.0, 0.12), (3.0, 0.03)],
            Family::Clarinet => harmonic(|n| 1.0 / n, 2),
            Family::Brass | Family::Violin => harmonic(|n| 1.0 / n, 1),
            Family::Bass => harmonic(|n| 1.0 / (n * n), 1),
            Family::Organ => vec![(1.0, 1.0), (2.0, 0.8), (4.0, 0.6), (8.0, 0.4)],
            Family::Bell => vec![(1.0, 1.0), (2.76, 0.6), (5.40, 0.4), (8.93, 0.25)],
            Family::Shaker => Vec::new(),
        }
    }

    /// A note of `secs` seconds at a random pitch and unit peak amplitude.
    pub fn note(self, rng: &mut impl Rng, secs: f64) -> Vec<f64> {
        let n = (secs * SR) as usize;
        let (lo, hi) = self.pitch_range();
        let f0 = lo * (hi / lo).powf(rng.gen::<f64>());
        let mut x = vec![0.0; n];
        match self {
            Family::Shaker => {
                // One-pole high-passed noise with 8 Hz amplitude bursts.
                let mut prev = 0.0;
                for (i, v) in x.iter_mut().enumerate() {
                    let w: f64 = rng.gen_range(-1.0..1.0);
                    let burst = 0.5 + 0.5 * (2.0 * PI * 8.0 * i as f64 / SR).sin().abs();
                    *v = (w - 0.9 * prev) * burst;
                    prev = w;
                }
            }
            _ => {
                for (ratio, amp) in self.partials() {
                    let f = f0 * ratio;
                    if f >= 0.45 * SR {
                        continue;
                    }
                    let phase = rng.gen_range(0.0..2.0 * PI);
                    let vibrato = matches!(self, Family::Violin);
                    for (i, v) in x.iter_mut().enumerate() {
                        let t = i as f64 / SR;
                        let arg = if vibrato {
                            2.0 * PI * f * t + 0.004 * f / 5.5 * (2.0 * PI * 5.5 * t).sin()
                        } else {
                            2.0 * PI * f * t
                        };
                        *v += amp * (arg + phase).sin();
                    }
                }
                if matches!(self, Family::Flute) {
                    for v in x.iter_mut() {
                        *v += 0.02 * rng.gen_range(-1.0..1.0);
                    }
                }
            }
        }
        apply_envelope(self, &mut x);
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            x.iter_mut().for_each(|v| *v /= peak);
        }
        x
    }
}

fn apply_envelope(family: Family, x: &mut [f64]) {
    let n = x.len();
    let attack = (0.02 * SR) as usize;
    let release = (0.05 * SR) as usize;
    for (i, v) in x.iter_mut().enumerate() {
        let t = i as f64 / SR;
        let mut g = match family {
            Family::Bass => (-t * 3.0).exp(),
            Family::Bell => (-t * 1.2).exp(),
            _ => 1.0,
        };
        if i < attack {
            g *= i as f64 / attack as f64;
        }
        if i + release > n {
            g *= (n - i) as f64 / release as f64;
        }
        *v *= g;
    }
}

/// Isolated recordings: `per_family` notes per family, padded with silence.
pub fn recordings(families: &[Family], per_family: usize, seed: u64) -> Vec<(String, Vec<AudioSignal>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    families
        .iter()
        .map(|&f| {
            let sounds = (0..per_family)
                .map(|_| {
                    let secs = rng.gen_range(0.4..0.9);
                    let mut x = vec![0.0; (0.1 * SR) as usize];
                    x.extend(f.note(&mut rng, secs).iter().map(|v| 0.8 * v));
                    x.extend(vec![0.0; (0.15 * SR) as usize]);
                    AudioSignal::new(x)
                })
                .collect();
            (f.name().to_string(), sounds)
        })
        .collect()
}

/// A polyphonic track of `secs` seconds made of 1–3 s sections, each with a
/// random non-empty subset of the families playing at random levels.
/// Returns the mixed audio and per-instrument segment annotations.
pub fn polyphonic_track(families: &[Family], secs: f64, seed: u64) -> (AudioSignal, Vec<Segment>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (secs * SR) as usize;
    let mut mix = vec![0.0; total];
    let mut segments = Vec::new();
    let mut start = 0usize;
    while start < total {
        let len = ((rng.gen_range(1.0..3.0) * SR) as usize).min(total - start);
        let count = rng.gen_range(1..=families.len().min(4));
        let chosen = rand::seq::index::sample(&mut rng, families.len(), count).into_vec();
        for &c in &chosen {
            let level = rng.gen_range(0.3..1.0);
            let note = families[c].note(&mut rng, len as f64 / SR);
            for (m, v) in mix[start..start + note.len()].iter_mut().zip(&note) {
                *m += level * v;
            }
            segments.push(Segment {
                start: start as f64 / SR,
                end: (start + len) as f64 / SR,
                labels: LabelSet::new([c]),
            });
        }
        start += len;
    }
    let peak = mix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    mix.iter_mut().for_each(|v| *v *= 0.9 / peak);
    (AudioSignal::new(mix), segments)
}

/// Leaf of `x` recomputed from `1 + Σ 2^(i-1) σ_i(x)`, returned 0-based.
fn oracle_leaf(criteria: &[SplitCriterion], x: &[f64]) -> usize {
    let mut leaf = 1usize;
    for (i, c) in criteria.iter().enumerate() {
        let sigma = if x[c.feature_index] > c.threshold { 1 } else { 0 };
        leaf += (1usize << i) * sigma;
    }
    leaf - 1
}

/// Expands the bag into a list of object indices, one entry per draw.
fn expand(bag: &Bag) -> Vec<usize> {
    bag.counts()
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| std::iter::repeat_n(i, m as usize))
        .collect()
}

/// Leaf scores by enumerating the bag multiset, for every leaf and class.
pub fn oracle_scores(criteria: &[SplitCriterion], bag: &Bag, set: &TrainingSet) -> Vec<Vec<f64>> {
    let members = expand(bag);
    let c = set.class_count() as f64;
    let n = members.len() as f64;
    (0..1usize << criteria.len())
        .map(|leaf| {
            let in_leaf: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&o| oracle_leaf(criteria, set.row(o)) == leaf)
                .collect();
            (0..set.class_count())
                .map(|y| {
                    let l_and_y = in_leaf.iter().filter(|&&o| set.labels(o).contains(y)).count() as f64;
                    let y_all = members.iter().filter(|&&o| set.labels(o).contains(y)).count() as f64;
                    let e = (1.0 + l_and_y) / (c + in_leaf.len() as f64) * (c + n) / (1.0 + y_all);
                    e.ln()
                })
                .collect()
        })
        .collect()
}

/// Leaf score quotients by enumerating the bag multiset.
pub fn oracle_quotients(criteria: &[SplitCriterion], bag: &Bag, set: &TrainingSet) -> Vec<Vec<f64>> {
    let members = expand(bag);
    (0..1usize << criteria.len())
        .map(|leaf| {
            let in_leaf: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&o| oracle_leaf(criteria, set.row(o)) == leaf)
                .collect();
            (0..set.class_count())
                .map(|y| {
                    let has = |o: &&usize| set.labels(**o).contains(y);
                    let l_and_y = in_leaf.iter().filter(has).count() as f64;
                    let l_not_y = in_leaf.len() as f64 - l_and_y;
                    let y_all = members.iter().filter(has).count() as f64;
                    let not_y = members.len() as f64 - y_all;
                    let e = (1.0 + l_and_y) / (1.0 + l_not_y) * (1.0 + not_y) / (1.0 + y_all);
                    e.ln()
                })
                .collect()
        })
        .collect()
}

/// Random multi-label dataset with `n` objects, `features` uniform features
/// and `classes` classes, each object carrying 1..=classes labels.
pub fn random_dataset(rng: &mut impl Rng, n: usize, features: usize, classes: usize) -> TrainingSet {
    let catalog = (0..classes).map(|c| format!("c{c}")).collect();
    let objects = (0..n)
        .map(|_| {
            let x = (0..features).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let k = rng.gen_range(1..=classes);
            let y = rand::seq::index::sample(rng, classes, k).into_vec();
            (x, LabelSet::new(y))
        })
        .collect();
    TrainingSet::from_objects(catalog, objects).unwrap()
}
