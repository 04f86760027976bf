//! The 45 per-block descriptors.
//!
//! Layout conventions:
//! - flatness: quarter-octave bands `[250·2^(j/4), 250·2^((j+1)/4))` Hz,
//!   the lowest 25 of 32; DC excluded.
//! - log-frequency centroid/spread: `log2(f / 1000)`; bins below 62.5 Hz
//!   pooled into one coefficient at 31.25 Hz.
//! - MFCC: 24 triangular mel filters over 0..22050 Hz on
//!   `m = 2595·log10(1 + f/700)`, orthonormal DCT-II coefficients 1..=12,
//!   then the log time-domain energy.
//! - zero-crossing rate: sign changes per sample.
//! - roll-off: lowest bin frequency where the accumulated magnitude (DC
//!   excluded) reaches 85 % of the total.
//! - linear centroid/spread: Hz, DC excluded.

use std::f64::consts::PI;
use std::ops::Range;

use super::spectrum::PowerSpectrum;
use super::{EPSILON, SAMPLE_RATE};

pub const FLATNESS_BANDS: usize = 25;
pub const MEL_FILTERS: usize = 24;
pub const CEPSTRAL_COEFFS: usize = 12;
pub const BASE_COUNT: usize = FLATNESS_BANDS + 3 + CEPSTRAL_COEFFS + 1 + 4;

const FLATNESS_LOW_EDGE_HZ: f64 = 250.0;
const LOG_POOL_EDGE_HZ: f64 = 62.5;
const ROLLOFF_FRACTION: f64 = 0.85;

/// Base descriptors of one block, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseDescriptors {
    pub flatness: [f64; FLATNESS_BANDS],
    pub centroid: f64,
    pub spread: f64,
    pub energy: f64,
    /// Cepstral coefficients 1..=12 followed by the log frame energy.
    pub mfcc: [f64; CEPSTRAL_COEFFS + 1],
    pub zero_crossing_rate: f64,
    pub rolloff: f64,
    pub lin_centroid: f64,
    pub lin_spread: f64,
}

impl BaseDescriptors {
    pub fn to_array(&self) -> [f64; BASE_COUNT] {
        let mut out = [0.0; BASE_COUNT];
        let (flat, rest) = out.split_at_mut(FLATNESS_BANDS);
        flat.copy_from_slice(&self.flatness);
        rest[0] = self.centroid;
        rest[1] = self.spread;
        rest[2] = self.energy;
        rest[3..3 + self.mfcc.len()].copy_from_slice(&self.mfcc);
        let tail = &mut rest[3 + self.mfcc.len()..];
        tail[0] = self.zero_crossing_rate;
        tail[1] = self.rolloff;
        tail[2] = self.lin_centroid;
        tail[3] = self.lin_spread;
        out
    }
}

pub(crate) fn base_names() -> Vec<String> {
    let mut names: Vec<String> = (1..=FLATNESS_BANDS).map(|i| format!("flat_{i}")).collect();
    names.extend(
        ["AudioSpectrumCentroid", "AudioSpectrumSpread", "Energy"]
            .iter()
            .map(|s| s.to_string()),
    );
    names.extend((1..=CEPSTRAL_COEFFS + 1).map(|i| format!("MFCC_{i}")));
    names.extend(
        ["ZeroCrossingRate", "RollOff", "LinCentroid", "LinSpread"]
            .iter()
            .map(|s| s.to_string()),
    );
    names
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

struct MelFilter {
    first_bin: usize,
    weights: Vec<f64>,
}

/// Precomputed band layouts for one block length.
pub(crate) struct DescriptorTables {
    block_len: usize,
    bins: usize,
    flat_bands: Vec<Range<usize>>,
    /// `log2(f/1000)` per bin from `log_first_bin` on.
    log_freq: Vec<f64>,
    log_first_bin: usize,
    mel: Vec<MelFilter>,
    dct: Vec<[f64; MEL_FILTERS]>,
}

impl DescriptorTables {
    pub fn new(block_len: usize) -> Self {
        let bins = block_len / 2 + 1;
        let bin_hz = SAMPLE_RATE as f64 / block_len as f64;
        let freq = |k: usize| k as f64 * bin_hz;

        let flat_bands = (0..FLATNESS_BANDS)
            .map(|j| {
                let lo = FLATNESS_LOW_EDGE_HZ * 2f64.powf(j as f64 / 4.0);
                let hi = FLATNESS_LOW_EDGE_HZ * 2f64.powf((j + 1) as f64 / 4.0);
                let start = (1..bins).find(|&k| freq(k) >= lo).unwrap_or(bins);
                let end = (start..bins).find(|&k| freq(k) >= hi).unwrap_or(bins);
                start..end
            })
            .collect();

        let log_first_bin = (0..bins).find(|&k| freq(k) >= LOG_POOL_EDGE_HZ).unwrap_or(bins);
        let log_freq = (log_first_bin..bins)
            .map(|k| (freq(k) / 1000.0).log2())
            .collect();

        let nyquist = SAMPLE_RATE as f64 / 2.0;
        let mel_max = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..MEL_FILTERS + 2)
            .map(|i| mel_to_hz(mel_max * i as f64 / (MEL_FILTERS + 1) as f64))
            .collect();
        let mel = edges
            .windows(3)
            .map(|e| {
                let (lo, mid, hi) = (e[0], e[1], e[2]);
                let first_bin = (0..bins).find(|&k| freq(k) > lo).unwrap_or(bins);
                let weights = (first_bin..bins)
                    .take_while(|&k| freq(k) < hi)
                    .map(|k| {
                        let f = freq(k);
                        if f <= mid {
                            (f - lo) / (mid - lo)
                        } else {
                            (hi - f) / (hi - mid)
                        }
                    })
                    .collect();
                MelFilter { first_bin, weights }
            })
            .collect();

        let m = MEL_FILTERS as f64;
        let dct = (1..=CEPSTRAL_COEFFS)
            .map(|k| {
                let mut row = [0.0; MEL_FILTERS];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = (2.0 / m).sqrt() * (PI * k as f64 * (j as f64 + 0.5) / m).cos();
                }
                row
            })
            .collect();

        DescriptorTables {
            block_len,
            bins,
            flat_bands,
            log_freq,
            log_first_bin,
            mel,
            dct,
        }
    }

    pub fn compute(&self, spectrum: &PowerSpectrum, samples: &[f64]) -> BaseDescriptors {
        debug_assert_eq!(spectrum.bins(), self.bins);
        debug_assert_eq!(samples.len(), self.block_len);
        let power = &spectrum.power;

        let mut flatness = [1.0; FLATNESS_BANDS];
        for (flat, band) in flatness.iter_mut().zip(&self.flat_bands) {
            if !band.is_empty() {
                *flat = flatness_of(&power[band.clone()]);
            }
        }

        let pooled: f64 = power[..self.log_first_bin].iter().sum();
        let pooled_log = (LOG_POOL_EDGE_HZ / 2.0 / 1000.0).log2();
        let weighted = power[self.log_first_bin..]
            .iter()
            .zip(&self.log_freq)
            .map(|(&p, &l)| (p, l))
            .chain(std::iter::once((pooled, pooled_log)));
        let (centroid, spread) = weighted_moments(weighted);

        let total: f64 = power.iter().sum();
        let energy = total.max(EPSILON).ln();

        let mut mfcc = [0.0; CEPSTRAL_COEFFS + 1];
        let log_mel: Vec<f64> = self
            .mel
            .iter()
            .map(|f| {
                let e: f64 = power[f.first_bin..]
                    .iter()
                    .zip(&f.weights)
                    .map(|(p, w)| p * w)
                    .sum();
                e.max(EPSILON).ln()
            })
            .collect();
        for (c, row) in mfcc.iter_mut().zip(&self.dct) {
            *c = row.iter().zip(&log_mel).map(|(a, b)| a * b).sum();
        }
        let time_energy: f64 = samples.iter().map(|s| s * s).sum();
        mfcc[CEPSTRAL_COEFFS] = time_energy.max(EPSILON).ln();

        let crossings = samples
            .windows(2)
            .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
            .count();
        let zero_crossing_rate = crossings as f64 / samples.len() as f64;

        let rolloff = rolloff_of(spectrum);

        let linear = power
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &p)| (p, spectrum.frequency(k)));
        let (lin_centroid, lin_spread) = weighted_moments(linear);

        BaseDescriptors {
            flatness,
            centroid,
            spread,
            energy,
            mfcc,
            zero_crossing_rate,
            rolloff,
            lin_centroid,
            lin_spread,
        }
    }
}

/// Geometric over arithmetic mean of floored band powers, in `(0, 1]`.
fn flatness_of(band: &[f64]) -> f64 {
    let n = band.len() as f64;
    let log_mean = band.iter().map(|p| p.max(EPSILON).ln()).sum::<f64>() / n;
    let mean = band.iter().map(|p| p.max(EPSILON)).sum::<f64>() / n;
    (log_mean.exp() / mean).min(1.0)
}

/// Weighted mean and RMS deviation of `(weight, value)` pairs; zero when the
/// total weight is zero.
fn weighted_moments(pairs: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let total: f64 = pairs.clone().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let mean = pairs.clone().map(|(w, v)| w * v).sum::<f64>() / total;
    let var = pairs.map(|(w, v)| w * (v - mean).powi(2)).sum::<f64>() / total;
    (mean, var.sqrt())
}

fn rolloff_of(spectrum: &PowerSpectrum) -> f64 {
    let mags = &spectrum.magnitude[1..];
    let total: f64 = mags.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let target = ROLLOFF_FRACTION * total;
    let mut acc = 0.0;
    for (i, m) in mags.iter().enumerate() {
        acc += m;
        if acc >= target {
            return spectrum.frequency(i + 1);
        }
    }
    spectrum.frequency(spectrum.bins() - 1)
}
