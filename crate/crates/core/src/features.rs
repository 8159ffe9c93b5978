//! Scale-invariant health features.
//!
//! Every feature here satisfies `psi(k * f) == psi(f)` for any `k != 0`, so
//! the arbitrary gain introduced by blind filtering does not leak into the
//! health indicators.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{degenerate, invalid, Result};
use crate::signal::{autocorrelation, centered, hilbert_envelope, Acf, Signal};

/// Default half-width of the BLEHNR search band, as a fraction of the fault
/// period.
pub const DEFAULT_BAND_FRACTION: f64 = 0.02;

/// `(|f|_p / |f|_q)^p`.
pub fn lp_lq_norm(f: &[f64], p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > p && q.is_finite()) {
        return Err(invalid!("need 0 < p < q, got p = {p}, q = {q}"));
    }
    let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 || !peak.is_finite() {
        return Err(degenerate!("l_p/l_q norm of an all-zero or non-finite vector"));
    }
    // Work on f / max|f| to keep the powers in range.
    let (sp, sq) = f.iter().fold((0.0, 0.0), |(sp, sq), v| {
        let a = v.abs() / peak;
        (sp + a.powf(p), sq + a.powf(q))
    });
    Ok((sp.powf(1.0 / p) / sq.powf(1.0 / q)).powf(p))
}

/// Non-excess sample kurtosis of mean-removed `f` (Gaussian -> 3).
pub fn kurtosis(f: &[f64]) -> Result<f64> {
    if f.len() < 4 {
        return Err(invalid!("kurtosis needs at least 4 samples, got {}", f.len()));
    }
    let c = centered(f)?;
    let (m2, m4) = c.iter().fold((0.0, 0.0), |(m2, m4), v| {
        let v2 = v * v;
        (m2 + v2, m4 + v2 * v2)
    });
    Ok(f.len() as f64 * m4 / (m2 * m2))
}

/// Rolling element bearing geometry. Diameters share any length unit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BearingGeometry {
    pub n_rolling_elements: u32,
    pub roller_diameter: f64,
    pub pitch_diameter: f64,
    pub contact_angle_rad: f64,
}

impl BearingGeometry {
    fn validate(&self) -> Result<()> {
        if self.n_rolling_elements < 2 {
            return Err(invalid!("need at least 2 rolling elements"));
        }
        if !(self.roller_diameter > 0.0 && self.roller_diameter < self.pitch_diameter) {
            return Err(invalid!("need 0 < roller diameter < pitch diameter"));
        }
        if !(self.ratio_cos().abs() < 1.0) {
            return Err(invalid!("|cos(contact angle) d/D| must be below 1"));
        }
        Ok(())
    }

    fn ratio_cos(&self) -> f64 {
        self.roller_diameter / self.pitch_diameter * self.contact_angle_rad.cos()
    }
}

/// Characteristic defect frequencies, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaultFrequencies {
    pub bpfo_hz: f64,
    pub bpfi_hz: f64,
    pub bsf_hz: f64,
}

impl FaultFrequencies {
    pub fn new(bpfo_hz: f64, bpfi_hz: f64, bsf_hz: f64) -> Result<Self> {
        for (name, v) in [("BPFO", bpfo_hz), ("BPFI", bpfi_hz), ("BSF", bsf_hz)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid!("{name} must be positive, got {v}"));
            }
        }
        Ok(Self { bpfo_hz, bpfi_hz, bsf_hz })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.bpfo_hz, self.bpfi_hz, self.bsf_hz]
    }
}

/// Standard bearing kinematics.
pub fn fault_frequencies(geometry: &BearingGeometry, shaft_hz: f64) -> Result<FaultFrequencies> {
    geometry.validate()?;
    if !(shaft_hz > 0.0 && shaft_hz.is_finite()) {
        return Err(invalid!("shaft speed must be positive, got {shaft_hz}"));
    }
    let n = geometry.n_rolling_elements as f64;
    let r = geometry.ratio_cos();
    let bpfo = 0.5 * n * shaft_hz * (1.0 - r);
    let bpfi = 0.5 * n * shaft_hz * (1.0 + r);
    let bsf = geometry.pitch_diameter / (2.0 * geometry.roller_diameter) * shaft_hz * (1.0 - r * r);
    FaultFrequencies::new(bpfo, bpfi, bsf)
}

/// How the band-limited ACF peak is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BlehnrMode {
    /// Highest normalized ACF value in the band, in `[-1, 1]`.
    #[default]
    AcfPeak,
    /// Harmonic-to-noise ratio `r / (1 - r)` of that peak.
    HarmonicToNoise,
}

/// Integer lag band `[(1-b) fs/f, (1+b) fs/f]`.
fn lag_band(sample_rate_hz: f64, fault_hz: f64, band_fraction: f64, n: usize) -> Result<(usize, usize)> {
    if !(fault_hz > 0.0 && fault_hz.is_finite()) {
        return Err(invalid!("fault frequency must be positive, got {fault_hz}"));
    }
    if !(band_fraction > 0.0 && band_fraction <= 0.2) {
        return Err(invalid!("band fraction must lie in (0, 0.2], got {band_fraction}"));
    }
    let period = sample_rate_hz / fault_hz;
    if period < 2.0 {
        return Err(invalid!("fault period of {period} samples is below 2"));
    }
    let lo = ((1.0 - band_fraction) * period).ceil().max(1.0) as usize;
    let hi = ((1.0 + band_fraction) * period).floor() as usize;
    if lo > hi {
        return Err(invalid!("lag band around {fault_hz} Hz is empty after rounding"));
    }
    if hi >= n {
        return Err(invalid!("lag band reaches {hi}, signal has only {n} samples"));
    }
    Ok((lo, hi))
}

fn band_peak(acf: &Acf, lo: usize, hi: usize, mode: BlehnrMode) -> f64 {
    let r = acf.values[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match mode {
        BlehnrMode::AcfPeak => r,
        BlehnrMode::HarmonicToNoise => r / (1.0 - r),
    }
}

/// Band-limited envelope harmonic-to-noise ratio at `fault_hz`: highest
/// value of the envelope ACF within `band_fraction` of the fault period.
pub fn blehnr(signal: &Signal, fault_hz: f64, band_fraction: f64) -> Result<f64> {
    blehnr_with_mode(signal, fault_hz, band_fraction, BlehnrMode::AcfPeak)
}

pub fn blehnr_with_mode(signal: &Signal, fault_hz: f64, band_fraction: f64, mode: BlehnrMode) -> Result<f64> {
    let (lo, hi) = lag_band(signal.sample_rate_hz(), fault_hz, band_fraction, signal.len())?;
    let env = hilbert_envelope(signal)?;
    let acf = autocorrelation(env.samples(), hi)?;
    Ok(band_peak(&acf, lo, hi, mode))
}

/// The five scale-invariant features used for diagnosis and assessment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    pub kurtosis: f64,
    pub l1_l2: f64,
    pub blehnr_bpfo: f64,
    pub blehnr_bpfi: f64,
    pub blehnr_bsf: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 5] = ["kurtosis", "l1_l2", "blehnr_bpfo", "blehnr_bpfi", "blehnr_bsf"];

    pub fn to_array(&self) -> [f64; 5] {
        [self.kurtosis, self.l1_l2, self.blehnr_bpfo, self.blehnr_bpfi, self.blehnr_bsf]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.to_array().to_vec()
    }
}

/// Computes all five features; the envelope and its ACF are shared by the
/// three BLEHNR entries.
pub fn extract_feature_vector(
    signal: &Signal,
    faults: &FaultFrequencies,
    band_fraction: f64,
) -> Result<FeatureVector> {
    extract_feature_vector_with_mode(signal, faults, band_fraction, BlehnrMode::AcfPeak)
}

pub fn extract_feature_vector_with_mode(
    signal: &Signal,
    faults: &FaultFrequencies,
    band_fraction: f64,
    mode: BlehnrMode,
) -> Result<FeatureVector> {
    let fs = signal.sample_rate_hz();
    let n = signal.len();
    let bands = [
        lag_band(fs, faults.bpfo_hz, band_fraction, n)?,
        lag_band(fs, faults.bpfi_hz, band_fraction, n)?,
        lag_band(fs, faults.bsf_hz, band_fraction, n)?,
    ];
    let max_lag = bands.iter().map(|b| b.1).max().unwrap_or(1);
    let env = hilbert_envelope(signal)?;
    let acf = autocorrelation(env.samples(), max_lag)?;
    let [o, i, b] = bands.map(|(lo, hi)| band_peak(&acf, lo, hi, mode));

    Ok(FeatureVector {
        kurtosis: kurtosis(signal.samples())?,
        l1_l2: lp_lq_norm(signal.samples(), 1.0, 2.0)?,
        blehnr_bpfo: o,
        blehnr_bpfi: i,
        blehnr_bsf: b,
    })
}
