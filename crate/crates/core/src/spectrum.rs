//! Windowed spectral estimates of uniformly sampled records.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A spectral line: angular frequency (rad/s) and real amplitude (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPeak {
    #[serde(rename = "frequency_rad_per_s")]
    pub frequency: f64,
    #[serde(rename = "amplitude_m")]
    pub amplitude: f64,
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Hann-weighted mean of the record.
pub fn windowed_mean(signal: &[f64]) -> f64 {
    let w = hann(signal.len());
    let norm: f64 = w.iter().sum();
    signal.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / norm
}

/// Amplitude of the sinusoidal component at `omega` (rad/s).
///
/// Uses the Hann-weighted discrete-time Fourier transform of the
/// mean-removed record; exact for a pure tone well separated from others.
pub fn amplitude_at(signal: &[f64], dt: f64, omega: f64) -> f64 {
    let w = hann(signal.len());
    let norm: f64 = w.iter().sum();
    let mean = windowed_mean(signal);
    let (mut re, mut im) = (0.0, 0.0);
    for (i, (x, w)) in signal.iter().zip(&w).enumerate() {
        let (s, c) = (omega * dt * i as f64).sin_cos();
        let v = (x - mean) * w;
        re += v * c;
        im -= v * s;
    }
    2.0 * re.hypot(im) / norm
}

/// Strongest line with angular frequency in [omega_min, omega_max].
///
/// The record is Hann-windowed and zero-padded eightfold; the peak bin is
/// refined by a parabola through the log magnitudes of its neighbours.
pub fn dominant_peak(signal: &[f64], dt: f64, omega_min: f64, omega_max: f64) -> Result<SpectrumPeak> {
    if signal.len() < 16 {
        return Err(Error::invalid("signal", "at least 16 samples are needed"));
    }
    if !(dt > 0.0) || !(omega_max > omega_min) {
        return Err(Error::invalid("band", "dt must be positive and the band non-empty"));
    }
    let n = (8 * signal.len()).next_power_of_two();
    let w = hann(signal.len());
    let mean = windowed_mean(signal);
    let mut buf: Vec<Complex<f64>> = signal
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex::new((x - mean) * w, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bin_width = 2.0 * PI / (n as f64 * dt);
    let lo = ((omega_min / bin_width).ceil() as usize).max(1);
    let hi = ((omega_max / bin_width).floor() as usize).min(n / 2 - 1);
    if lo > hi {
        return Err(Error::invalid("band", "band contains no frequency bins"));
    }
    let mag = |k: usize| buf[k].norm();
    let k = (lo..=hi)
        .max_by(|&i, &j| mag(i).total_cmp(&mag(j)))
        .expect("non-empty band");
    let (l, c, r) = (mag(k - 1).ln(), mag(k).ln(), mag(k + 1).ln());
    let denom = l - 2.0 * c + r;
    let delta = if denom < 0.0 { (0.5 * (l - r) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    let frequency = (k as f64 + delta) * bin_width;
    Ok(SpectrumPeak {
        frequency,
        amplitude: amplitude_at(signal, dt, frequency),
    })
}
