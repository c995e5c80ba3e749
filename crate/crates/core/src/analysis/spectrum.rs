//! Magnitude spectrum of a confidence signal.
//!
//! The signal is mean-subtracted and Hann-windowed before a real DFT; bin `k`
//! sits at `k * fps / N`. The dominant peak is the largest magnitude at or
//! above 0.2 Hz, which keeps slow drift and any DC residue out of the way.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisError;
use crate::model::ConfidenceSignal;
use crate::scalar::Scalar;

pub const MIN_SPECTRUM_SAMPLES: usize = 16;
pub const MIN_PEAK_HZ: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPeak<T> {
    pub frequency_hz: T,
    pub magnitude: T,
    /// Bin spacing `fps / N`.
    pub resolution_hz: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DominantPeak<T> {
    Peak(SpectrumPeak<T>),
    NoPeak,
}

impl<T> DominantPeak<T> {
    pub fn peak(&self) -> Option<&SpectrumPeak<T>> {
        match self {
            DominantPeak::Peak(p) => Some(p),
            DominantPeak::NoPeak => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    pub frequencies: Vec<T>,
    pub magnitudes: Vec<T>,
    pub dominant: DominantPeak<T>,
}

/// Symmetric Hann window of length `n`.
pub fn hann<T: Scalar>(n: usize) -> Vec<T> {
    if n == 1 {
        return vec![T::one()];
    }
    let denom = T::of_usize(n - 1);
    let two_pi = T::of(std::f64::consts::TAU);
    (0..n)
        .map(|i| T::of(0.5) * (T::one() - (two_pi * T::of_usize(i) / denom).cos()))
        .collect()
}

pub fn spectrum<T: Scalar>(signal: &ConfidenceSignal<T>) -> Result<Spectrum<T>, AnalysisError> {
    spectrum_of(signal.values(), signal.fps())
}

pub fn spectrum_of<T: Scalar>(values: &[T], fps: f64) -> Result<Spectrum<T>, AnalysisError> {
    let n = values.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(AnalysisError::InsufficientSamples {
            got: n,
            need: MIN_SPECTRUM_SAMPLES,
        });
    }
    let nt = T::of_usize(n);
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / nt;
    let window = hann::<T>(n);
    let mut buf: Vec<Complex<T>> = values
        .iter()
        .zip(&window)
        .map(|(&v, &w)| Complex::new((v - mean) * w, T::zero()))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let fps_t = T::of(fps);
    let resolution = fps_t / nt;
    let frequencies: Vec<T> = (0..bins).map(|k| T::of_usize(k) * resolution).collect();
    let magnitudes: Vec<T> = buf[..bins].iter().map(|c| c.norm()).collect();

    let amplitude = values.iter().fold(T::zero(), |a, &v| a.max((v - mean).abs()));
    let floor = T::epsilon().sqrt() * nt * amplitude.max(T::one());
    let dominant = frequencies
        .iter()
        .zip(&magnitudes)
        .filter(|(f, _)| **f >= T::of(MIN_PEAK_HZ))
        .fold(None::<(T, T)>, |best, (&f, &m)| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((f, m)),
        })
        .filter(|&(_, m)| m > floor)
        .map(|(frequency_hz, magnitude)| {
            DominantPeak::Peak(SpectrumPeak {
                frequency_hz,
                magnitude,
                resolution_hz: resolution,
            })
        })
        .unwrap_or(DominantPeak::NoPeak);
    Ok(Spectrum {
        frequencies,
        magnitudes,
        dominant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// O(N^2) DFT of the same windowed, mean-removed signal.
    fn naive_magnitudes(values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let w: Vec<f64> = (0..n)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
            .collect();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, v) in values.iter().enumerate() {
                    let ang = -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
                    re += (v - mean) * w[i] * ang.cos();
                    im += (v - mean) * w[i] * ang.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    fn square(freq: f64, fps: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let phase = (i as f64 * freq / fps).fract();
                if phase < 0.5 {
                    0.9
                } else {
                    0.2
                }
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<f64> = (0..97).map(|i| ((i * 37 % 11) as f64) / 11.0).collect();
        let s = spectrum_of(&x, 30.0).unwrap();
        let oracle = naive_magnitudes(&x);
        assert_eq!(s.magnitudes.len(), oracle.len());
        for (a, b) in s.magnitudes.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert_eq!(s.frequencies[1], 30.0 / 97.0);
    }

    #[test]
    fn constant_signal_has_no_peak() {
        let s = spectrum_of(&[0.95f64; 64], 24.0).unwrap();
        assert_eq!(s.dominant, DominantPeak::NoPeak);
        assert!(s.magnitudes[1..].iter().all(|m| *m < 1e-12));
    }

    #[test]
    fn square_wave_at_1_3_hz() {
        let x = square(1.3, 24.0, 720);
        let s = spectrum_of(&x, 24.0).unwrap();
        let peak = s.dominant.peak().unwrap();
        assert!((peak.frequency_hz - 1.3).abs() <= 24.0 / 720.0);
        // Oracle agrees on the argmax bin.
        let oracle = naive_magnitudes(&x);
        let k = oracle
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(k, _)| *k as f64 * 24.0 / 720.0 >= MIN_PEAK_HZ)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak.frequency_hz, k as f64 * 24.0 / 720.0);
        assert_eq!(peak.resolution_hz, 24.0 / 720.0);
    }

    #[test]
    fn works_in_single_precision() {
        let x: Vec<f32> = square(2.0, 30.0, 300).into_iter().map(|v| v as f32).collect();
        let s = spectrum_of(&x, 30.0).unwrap();
        let p = s.dominant.peak().unwrap();
        assert!((p.frequency_hz - 2.0).abs() <= 0.1);
    }

    #[test]
    fn short_signal_is_rejected() {
        assert!(matches!(
            spectrum_of(&[0.5f64; 15], 24.0),
            Err(AnalysisError::InsufficientSamples { got: 15, need: 16 })
        ));
    }
}
