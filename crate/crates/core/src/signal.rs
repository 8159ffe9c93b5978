//! Signal containers and the basic transforms used by every later stage.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{degenerate, invalid, Result};
use crate::fft;

/// A uniformly sampled, real-valued time series.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    /// Builds a signal, checking that it has at least two finite samples and
    /// a positive, finite sample rate.
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid!("signal needs at least 2 samples, got {}", samples.len()));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(invalid!("sample rate must be positive and finite, got {sample_rate_hz}"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid!("sample {i} is not finite"));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Returns `k * self`. Fails if the product overflows.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|v| v * k).collect(), self.sample_rate_hz)
    }
}

/// One-sided magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Spectrum {
    pub frequencies_hz: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width_hz(&self) -> f64 {
        self.frequencies_hz.get(1).copied().unwrap_or(0.0)
    }

    /// Index of the bin closest to `freq_hz`.
    pub fn nearest_bin(&self, freq_hz: f64) -> usize {
        let width = self.bin_width_hz();
        if width <= 0.0 {
            return 0;
        }
        let idx = (freq_hz / width).round();
        (idx.max(0.0) as usize).min(self.magnitudes.len() - 1)
    }

    /// Largest magnitude within `tolerance_bins` of the bin nearest to
    /// `freq_hz`, with the bin it was found at.
    pub fn peak_near(&self, freq_hz: f64, tolerance_bins: usize) -> (usize, f64) {
        let centre = self.nearest_bin(freq_hz);
        let lo = centre.saturating_sub(tolerance_bins);
        let hi = (centre + tolerance_bins).min(self.magnitudes.len() - 1);
        let mut best = (lo, self.magnitudes[lo]);
        for k in lo..=hi {
            if self.magnitudes[k] > best.1 {
                best = (k, self.magnitudes[k]);
            }
        }
        best
    }

    /// Median magnitude over all nonzero-frequency bins.
    pub fn median_magnitude(&self) -> f64 {
        let mut m: Vec<f64> = self.magnitudes.iter().skip(1).copied().collect();
        if m.is_empty() {
            return self.magnitudes.first().copied().unwrap_or(0.0);
        }
        m.sort_by(f64::total_cmp);
        let mid = m.len() / 2;
        if m.len().is_multiple_of(2) {
            0.5 * (m[mid - 1] + m[mid])
        } else {
            m[mid]
        }
    }

    /// Bin of the largest nonzero-frequency magnitude.
    pub fn dominant_bin(&self) -> usize {
        let mut best = 1.min(self.magnitudes.len() - 1);
        for k in 1..self.magnitudes.len() {
            if self.magnitudes[k] > self.magnitudes[best] {
                best = k;
            }
        }
        best
    }
}

/// Normalized autocorrelation, `values[k]` at lag `k`, `values[0] == 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Acf {
    pub values: Vec<f64>,
}

impl Acf {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn lags(&self) -> core::ops::RangeInclusive<usize> {
        0..=self.max_lag()
    }
}

/// Product of the Hankel data matrix of `y` (rows `y[i..i+l]`) with the
/// coefficient vector `w`: `out[i] = sum_j y[i + j] * w[j]`, for
/// `i in 0..=N-l`.
pub fn convolve_valid(y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    let l = w.len();
    if l < 2 || 2 * l > n {
        return Err(invalid!("filter length {l} outside [2, N/2] for N = {n}"));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("filter coefficients must be finite"));
    }
    Ok(hankel_product(y, w))
}

/// Unchecked kernel behind [`convolve_valid`].
pub(crate) fn hankel_product(y: &[f64], w: &[f64]) -> Vec<f64> {
    y.windows(w.len())
        .map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum())
        .collect()
}

/// Transpose product `Y^T d`: `out[j] = sum_i d[i] * y[i + j]`.
pub(crate) fn hankel_transpose_product(y: &[f64], d: &[f64], l: usize, out: &mut [f64]) {
    debug_assert_eq!(y.len(), d.len() + l - 1);
    for (j, o) in out.iter_mut().enumerate().take(l) {
        *o = y[j..j + d.len()].iter().zip(d).map(|(a, b)| a * b).sum();
    }
}

/// Magnitude of the analytic signal.
pub fn hilbert_envelope(signal: &Signal) -> Result<Signal> {
    let x = signal.samples();
    let n = x.len();
    if n < 4 {
        return Err(invalid!("envelope needs at least 4 samples, got {n}"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("signal contains non-finite samples"));
    }

    let mut spec = fft::forward_real(x);
    let positive_end = if n.is_multiple_of(2) { n / 2 } else { n.div_ceil(2) };
    for z in &mut spec[1..positive_end] {
        *z *= 2.0;
    }
    // DC stays, Nyquist (even n) stays, negative frequencies vanish.
    let neg_start = if n.is_multiple_of(2) { n / 2 + 1 } else { positive_end };
    for z in &mut spec[neg_start..] {
        *z = Complex64::new(0.0, 0.0);
    }
    fft::inverse(&mut spec);

    Signal::new(spec.iter().map(|z| z.norm()).collect(), signal.sample_rate_hz())
}

/// Biased autocorrelation of mean-removed `x`, normalized by the lag-0 value.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Acf> {
    let n = x.len();
    if max_lag >= n {
        return Err(invalid!("max_lag {max_lag} must be below the length {n}"));
    }
    let centered = centered(x)?;

    let raw = if (max_lag as u64 + 1) * (n as u64) <= 1 << 16 {
        (0..=max_lag)
            .map(|k| centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum())
            .collect::<Vec<f64>>()
    } else {
        let m = (2 * n).next_power_of_two();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (b, &v) in buf.iter_mut().zip(&centered) {
            b.re = v;
        }
        fft::forward(&mut buf);
        for z in buf.iter_mut() {
            *z = Complex64::new(z.norm_sqr(), 0.0);
        }
        fft::inverse(&mut buf);
        buf[..=max_lag].iter().map(|z| z.re).collect()
    };

    let r0 = raw[0];
    let mut values: Vec<f64> = raw.iter().map(|r| r / r0).collect();
    values[0] = 1.0;
    Ok(Acf { values })
}

/// Magnitude spectrum of the mean-removed envelope. Bin `k` sits at
/// `k * fs / N`; non-DC, non-Nyquist bins are doubled (single-sided
/// amplitude).
pub fn envelope_spectrum(signal: &Signal) -> Result<Spectrum> {
    let n = signal.len();
    if n < 8 {
        return Err(invalid!("envelope spectrum needs at least 8 samples, got {n}"));
    }
    let env = hilbert_envelope(signal)?;
    let mean = env.samples().iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = env.samples().iter().map(|v| v - mean).collect();
    let spec = fft::forward_real(&centered);

    let bins = n / 2 + 1;
    let fs = signal.sample_rate_hz();
    let frequencies_hz = (0..bins).map(|k| k as f64 * fs / n as f64).collect();
    let magnitudes = (0..bins)
        .map(|k| {
            let scale = if k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 2.0 };
            scale * spec[k].norm() / n as f64
        })
        .collect();
    Ok(Spectrum { frequencies_hz, magnitudes })
}

/// Mean-removed copy of `x`; errors when the variance is zero relative to
/// the signal's magnitude (which includes the all-zero case).
pub(crate) fn centered(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(degenerate!("empty input"));
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let var: f64 = c.iter().map(|v| v * v).sum();
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if !(var > 1e-24 * energy) || var == 0.0 {
        return Err(degenerate!("input has zero variance"));
    }
    Ok(c)
}
