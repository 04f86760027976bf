use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{Frame, SAMPLE_RATE};

/// One-sided spectrum of a Hamming-windowed block, bins `0..=N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    /// `|X_k|^2`.
    pub power: Vec<f64>,
    /// `|X_k|`.
    pub magnitude: Vec<f64>,
    pub bin_hz: f64,
}

impl PowerSpectrum {
    pub fn bins(&self) -> usize {
        self.power.len()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }
}

/// Hamming window plus a planned FFT for one block length.
#[derive(Clone)]
pub struct SpectrumAnalyzer {
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectrumAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumAnalyzer")
            .field("len", &self.window.len())
            .finish()
    }
}

pub(crate) fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

impl SpectrumAnalyzer {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "spectrum length must be positive");
        let fft = FftPlanner::new().plan_fft_forward(len);
        SpectrumAnalyzer {
            window: hamming(len),
            fft,
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Spectrum of `samples`, which must have exactly [`len`](Self::len) values.
    pub fn analyze(&self, samples: &[f64]) -> PowerSpectrum {
        let n = self.len();
        assert_eq!(samples.len(), n, "block length mismatch");
        let mut buf: Vec<Complex<f64>> = samples
            .iter()
            .zip(&self.window)
            .map(|(s, w)| Complex::new(s * w, 0.0))
            .collect();
        self.fft.process(&mut buf);
        let bins = n / 2 + 1;
        let power: Vec<f64> = buf[..bins].iter().map(|c| c.norm_sqr()).collect();
        let magnitude = power.iter().map(|p| p.sqrt()).collect();
        PowerSpectrum {
            power,
            magnitude,
            bin_hz: SAMPLE_RATE as f64 / n as f64,
        }
    }
}

/// Hamming-windowed power spectrum of a frame of any length.
pub fn power_spectrum(frame: &Frame<'_>) -> PowerSpectrum {
    SpectrumAnalyzer::new(frame.samples.len()).analyze(frame.samples)
}
