//! Synthetic bearing vibration: fault impulse trains exciting a damped
//! structural resonance, buried in Gaussian noise at a prescribed SNR.
//!
//! Each fault component is an impulse train whose period is jittered per
//! impulse. Every impulse rings the resonance
//! `h(t) = exp(-damping * t) * sin(2 pi f_r t)`. Inner-race and roller
//! impulses are amplitude modulated by `|cos(2 pi f_shaft t)|`, standing in
//! for the load zone / transmission path. Noise is scaled so that the clean
//! to noise power ratio equals `snr_db` exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::signal::Signal;

/// Impulses are truncated once the resonance envelope drops below this.
const TAIL_CUTOFF: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FaultComponent {
    Outer,
    Inner,
    Roller,
}

/// Which fault components are present. Empty means a healthy bearing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaultSet {
    pub outer: bool,
    pub inner: bool,
    pub roller: bool,
}

impl FaultSet {
    pub const NORMAL: Self = Self { outer: false, inner: false, roller: false };
    pub const OUTER: Self = Self { outer: true, inner: false, roller: false };
    pub const INNER: Self = Self { outer: false, inner: true, roller: false };
    pub const ROLLER: Self = Self { outer: false, inner: false, roller: true };

    pub fn is_empty(&self) -> bool {
        !(self.outer || self.inner || self.roller)
    }

    pub fn contains(&self, c: FaultComponent) -> bool {
        match c {
            FaultComponent::Outer => self.outer,
            FaultComponent::Inner => self.inner,
            FaultComponent::Roller => self.roller,
        }
    }

    pub fn components(&self) -> impl Iterator<Item = FaultComponent> + '_ {
        [FaultComponent::Outer, FaultComponent::Inner, FaultComponent::Roller]
            .into_iter()
            .filter(|c| self.contains(*c))
    }
}

/// The eight bearing conditions F1..F8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FaultMode {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
}

impl FaultMode {
    pub const ALL: [FaultMode; 8] = [
        FaultMode::F1,
        FaultMode::F2,
        FaultMode::F3,
        FaultMode::F4,
        FaultMode::F5,
        FaultMode::F6,
        FaultMode::F7,
        FaultMode::F8,
    ];

    pub fn fault_set(self) -> FaultSet {
        let (outer, inner, roller) = match self {
            FaultMode::F1 => (false, false, false),
            FaultMode::F2 => (true, false, false),
            FaultMode::F3 => (false, true, false),
            FaultMode::F4 => (false, false, true),
            FaultMode::F5 => (false, true, true),
            FaultMode::F6 => (true, true, false),
            FaultMode::F7 => (true, false, true),
            FaultMode::F8 => (true, true, true),
        };
        FaultSet { outer, inner, roller }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8"][self.index()]
    }

    pub fn description(self) -> &'static str {
        match self {
            FaultMode::F1 => "Normal",
            FaultMode::F2 => "Outer-race fault",
            FaultMode::F3 => "Inner-race fault",
            FaultMode::F4 => "Roller fault",
            FaultMode::F5 => "Inner-race + roller fault",
            FaultMode::F6 => "Outer-race + inner-race fault",
            FaultMode::F7 => "Outer-race + roller fault",
            FaultMode::F8 => "Outer-race + inner-race + roller fault",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaultSimConfig {
    pub faults: FaultSet,
    pub outer_hz: f64,
    pub inner_hz: f64,
    pub roller_hz: f64,
    pub resonance_hz: f64,
    /// Decay rate of the resonance, 1/s.
    pub damping_rate: f64,
    pub shaft_hz: f64,
    /// Clean-to-noise power ratio in dB; `+inf` produces a noiseless signal
    /// and is stored as `null` in serialized form.
    #[cfg_attr(feature = "serde", serde(with = "snr_serde"))]
    pub snr_db: f64,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    /// Half-width of the uniform per-impulse period perturbation.
    pub period_jitter_fraction: f64,
    pub seed: u64,
}

impl Default for FaultSimConfig {
    fn default() -> Self {
        Self {
            faults: FaultSet::OUTER,
            outer_hz: 100.0,
            inner_hz: 160.0,
            roller_hz: 70.0,
            resonance_hz: 3000.0,
            damping_rate: 800.0,
            shaft_hz: 33.3,
            snr_db: -8.0,
            n_samples: 20480,
            sample_rate_hz: 20000.0,
            period_jitter_fraction: 0.01,
            seed: 0,
        }
    }
}

impl FaultSimConfig {
    pub fn fault_hz(&self, c: FaultComponent) -> f64 {
        match c {
            FaultComponent::Outer => self.outer_hz,
            FaultComponent::Inner => self.inner_hz,
            FaultComponent::Roller => self.roller_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate_hz / 2.0;
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(invalid!("sample rate must be positive"));
        }
        if self.n_samples < 1024 {
            return Err(invalid!("need at least 1024 samples, got {}", self.n_samples));
        }
        if !(self.resonance_hz > 0.0 && self.resonance_hz < nyquist) {
            return Err(invalid!("resonance {} Hz must lie in (0, {nyquist})", self.resonance_hz));
        }
        if !(self.damping_rate > 0.0 && self.damping_rate.is_finite()) {
            return Err(invalid!("damping rate must be positive"));
        }
        if !(self.shaft_hz > 0.0 && self.shaft_hz.is_finite()) {
            return Err(invalid!("shaft frequency must be positive"));
        }
        if !(0.0..=0.05).contains(&self.period_jitter_fraction) {
            return Err(invalid!("period jitter must lie in [0, 0.05]"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(invalid!("SNR must be a number or +inf"));
        }
        for c in [FaultComponent::Outer, FaultComponent::Inner, FaultComponent::Roller] {
            let f = self.fault_hz(c);
            if !(f > 0.0 && f < self.resonance_hz) {
                return Err(invalid!("{c:?} fault frequency {f} Hz must lie in (0, resonance)"));
            }
        }
        Ok(())
    }
}

/// Clean and noise parts of a simulated record, kept apart so the SNR can
/// be measured.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedParts {
    pub clean: Vec<f64>,
    pub noise: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl SimulatedParts {
    pub fn measured_snr_db(&self) -> f64 {
        10.0 * (mean_power(&self.clean) / mean_power(&self.noise)).log10()
    }

    pub fn into_signal(self) -> Result<Signal> {
        let x = self.clean.iter().zip(&self.noise).map(|(c, n)| c + n).collect();
        Signal::new(x, self.sample_rate_hz)
    }
}

#[cfg(feature = "serde")]
mod snr_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> core::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

fn mean_power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// SplitMix64 finalizer; derives independent stream seeds from one seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noise-free fault signature for `config`.
pub fn clean_signature(config: &FaultSimConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let n = config.n_samples;
    let fs = config.sample_rate_hz;
    let mut clean = vec![0.0; n];
    let tail = ((1.0 / TAIL_CUTOFF).ln() / config.damping_rate * fs).ceil() as usize + 1;

    for (stream, component) in config.faults.components().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, stream as u64 + 1));
        let period = 1.0 / config.fault_hz(component);
        let modulated = component != FaultComponent::Outer;
        let mut t = rng.random::<f64>() * period;
        let duration = n as f64 / fs;
        while t < duration {
            let gain = if modulated { (2.0 * PI * config.shaft_hz * t).cos().abs() } else { 1.0 };
            let first = (t * fs).ceil() as usize;
            for k in first..(first + tail).min(n) {
                let dt = k as f64 / fs - t;
                clean[k] += gain * (-config.damping_rate * dt).exp() * (2.0 * PI * config.resonance_hz * dt).sin();
            }
            let jitter = if config.period_jitter_fraction > 0.0 {
                rng.random_range(-config.period_jitter_fraction..=config.period_jitter_fraction)
            } else {
                0.0
            };
            t += period * (1.0 + jitter);
        }
    }
    Ok(clean)
}

/// Unit-variance white Gaussian noise.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Noise with mean power exactly `power`.
fn noise_with_power(n: usize, power: f64, seed: u64) -> Vec<f64> {
    let mut noise = white_noise(n, seed);
    let scale = (power / mean_power(&noise)).sqrt();
    for v in noise.iter_mut() {
        *v *= scale;
    }
    noise
}

const NOISE_STREAM: u64 = 0;

/// Simulates a record and returns clean and noise parts separately. With no
/// fault component the noise has unit power.
pub fn simulate_parts(config: &FaultSimConfig) -> Result<SimulatedParts> {
    let clean = clean_signature(config)?;
    let n = config.n_samples;
    let noise_seed = derive_seed(config.seed, NOISE_STREAM);
    let noise = if config.snr_db == f64::INFINITY {
        vec![0.0; n]
    } else {
        let clean_power = mean_power(&clean);
        let power = if clean_power > 0.0 { clean_power / 10f64.powf(config.snr_db / 10.0) } else { 1.0 };
        noise_with_power(n, power, noise_seed)
    };
    Ok(SimulatedParts { clean, noise, sample_rate_hz: config.sample_rate_hz })
}

pub fn simulate_bearing_fault(config: &FaultSimConfig) -> Result<Signal> {
    simulate_parts(config)?.into_signal()
}

/// Unit-variance noise at unit sample rate with `x[n/2] = outlier_sigma`.
pub fn gaussian_with_outlier(n: usize, outlier_sigma: f64, seed: u64) -> Result<Signal> {
    if n < 1024 {
        return Err(invalid!("need at least 1024 samples, got {n}"));
    }
    if !(outlier_sigma >= 3.0 && outlier_sigma.is_finite()) {
        return Err(invalid!("outlier must be at least 3 sigma, got {outlier_sigma}"));
    }
    let mut x = white_noise(n, seed);
    x[n / 2] = outlier_sigma;
    Signal::new(x, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    pub mode: FaultMode,
    pub seed: u64,
    pub signal: Signal,
}

/// `n_per_class` records for each of F1..F8, each with its own derived seed,
/// ordered class by class.
pub fn make_fault_taxonomy_dataset(
    n_per_class: usize,
    base: &FaultSimConfig,
    seed: u64,
) -> Result<Vec<LabeledSignal>> {
    if n_per_class == 0 {
        return Err(invalid!("need at least one record per class"));
    }
    let mut out = Vec::with_capacity(8 * n_per_class);
    for mode in FaultMode::ALL {
        for i in 0..n_per_class {
            let record_seed = derive_seed(seed, (mode.index() * n_per_class + i) as u64 + 1_000);
            let config = FaultSimConfig { faults: mode.fault_set(), seed: record_seed, ..base.clone() };
            out.push(LabeledSignal { mode, seed: record_seed, signal: simulate_bearing_fault(&config)? });
        }
    }
    Ok(out)
}

/// Outer-race fault amplitude of record `index` in a degradation run:
/// zero before `onset`, then a linear ramp reaching one at the last record.
pub fn degradation_amplitude(index: usize, n_files: usize, onset: usize) -> f64 {
    if index < onset {
        0.0
    } else {
        (index - onset + 1) as f64 / (n_files - onset) as f64
    }
}

/// Run-to-failure analogue: `n_files` records sharing one noise level.
/// Records `0..onset` are noise only; from `onset` the outer-race signature
/// grows linearly to full scale. Full scale is `base` at `base.snr_db`.
pub fn make_degradation_sequence(n_files: usize, onset: usize, base: &FaultSimConfig) -> Result<Vec<Signal>> {
    if !(onset > 0 && onset < n_files) {
        return Err(invalid!("onset {onset} must lie strictly between 0 and {n_files}"));
    }
    if !base.snr_db.is_finite() {
        return Err(invalid!("a degradation sequence needs a finite SNR"));
    }
    let outer = FaultSimConfig { faults: FaultSet::OUTER, ..base.clone() };
    let reference_power = mean_power(&clean_signature(&outer)?);
    let noise_power = reference_power / 10f64.powf(base.snr_db / 10.0);

    (0..n_files)
        .map(|i| {
            let file_seed = derive_seed(base.seed, i as u64 + 10_000);
            let amplitude = degradation_amplitude(i, n_files, onset);
            let noise = noise_with_power(base.n_samples, noise_power, derive_seed(file_seed, NOISE_STREAM));
            let samples = if amplitude > 0.0 {
                let clean = clean_signature(&FaultSimConfig { seed: file_seed, ..outer.clone() })?;
                clean.iter().zip(&noise).map(|(c, e)| amplitude * c + e).collect()
            } else {
                noise
            };
            Signal::new(samples, base.sample_rate_hz)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::kurtosis;
    use crate::signal::{autocorrelation, envelope_spectrum, hilbert_envelope};

    #[test]
    fn noiseless_outer_race_has_fault_period() {
        let cfg = FaultSimConfig { snr_db: f64::INFINITY, period_jitter_fraction: 0.0, ..Default::default() };
        let s = simulate_bearing_fault(&cfg).unwrap();
        let spec = envelope_spectrum(&s).unwrap();
        let bin = spec.dominant_bin();
        assert!((spec.frequencies_hz[bin] - cfg.outer_hz).abs() <= spec.bin_width_hz());

        let env = hilbert_envelope(&s).unwrap();
        let acf = autocorrelation(env.samples(), 400).unwrap();
        let expected = (cfg.sample_rate_hz / cfg.outer_hz).round() as usize;
        let best = (10..=400).max_by(|&a, &b| acf.values[a].total_cmp(&acf.values[b])).unwrap();
        assert!(best.abs_diff(expected) <= 1, "{best} vs {expected}");
    }

    #[test]
    fn snr_is_exact() {
        for snr in [-8.0, 0.0, 5.5] {
            let parts = simulate_parts(&FaultSimConfig { snr_db: snr, seed: 3, ..Default::default() }).unwrap();
            assert!((parts.measured_snr_db() - snr).abs() < 0.1);
        }
    }

    #[test]
    fn normal_condition_is_gaussian_noise() {
        let cfg = FaultSimConfig { faults: FaultSet::NORMAL, seed: 4, ..Default::default() };
        let parts = simulate_parts(&cfg).unwrap();
        assert!(parts.clean.iter().all(|&v| v == 0.0));
        let s = parts.into_signal().unwrap();
        assert!((kurtosis(s.samples()).unwrap() - 3.0).abs() < 0.2);
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = FaultSimConfig { faults: FaultMode::F8.fault_set(), seed: 12, ..Default::default() };
        assert_eq!(simulate_bearing_fault(&cfg).unwrap(), simulate_bearing_fault(&cfg).unwrap());
        let other = FaultSimConfig { seed: 13, ..cfg.clone() };
        assert_ne!(simulate_bearing_fault(&cfg).unwrap(), simulate_bearing_fault(&other).unwrap());
    }

    #[test]
    fn config_validation() {
        let ok = FaultSimConfig::default();
        assert!(FaultSimConfig { resonance_hz: 10_001.0, ..ok.clone() }.validate().is_err());
        assert!(FaultSimConfig { outer_hz: 3500.0, ..ok.clone() }.validate().is_err());
        assert!(FaultSimConfig { n_samples: 1000, ..ok.clone() }.validate().is_err());
        assert!(FaultSimConfig { period_jitter_fraction: 0.06, ..ok.clone() }.validate().is_err());
        assert!(FaultSimConfig { snr_db: f64::NAN, ..ok }.validate().is_err());
    }

    #[test]
    fn outlier_signal() {
        let s = gaussian_with_outlier(8192, 8.0, 1).unwrap();
        let (idx, peak) = s
            .samples()
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        assert_eq!((idx, peak), (4096, 8.0));
        let without = white_noise(8192, 1);
        assert!(kurtosis(s.samples()).unwrap() > kurtosis(&without).unwrap());
        assert_eq!(s, gaussian_with_outlier(8192, 8.0, 1).unwrap());
        assert!(gaussian_with_outlier(100, 8.0, 1).is_err());
        assert!(gaussian_with_outlier(2048, 2.0, 1).is_err());
    }

    #[test]
    fn taxonomy_dataset_shape() {
        let base = FaultSimConfig { n_samples: 2048, ..Default::default() };
        let data = make_fault_taxonomy_dataset(10, &base, 5).unwrap();
        assert_eq!(data.len(), 80);
        for mode in FaultMode::ALL {
            assert_eq!(data.iter().filter(|d| d.mode == mode).count(), 10);
        }
        for i in 0..data.len() {
            for j in i + 1..data.len() {
                assert_ne!(data[i].signal, data[j].signal);
            }
        }
        assert!(make_fault_taxonomy_dataset(0, &base, 5).is_err());
    }

    #[test]
    fn degradation_sequence_shape() {
        let base = FaultSimConfig { n_samples: 2048, ..Default::default() };
        let seq = make_degradation_sequence(100, 40, &base).unwrap();
        assert_eq!(seq.len(), 100);
        assert_eq!(degradation_amplitude(39, 100, 40), 0.0);
        assert!(degradation_amplitude(40, 100, 40) > 0.0);
        assert_eq!(degradation_amplitude(99, 100, 40), 1.0);
        // Healthy records are plain noise: no impulsive excess kurtosis.
        for s in &seq[..40] {
            assert!((kurtosis(s.samples()).unwrap() - 3.0).abs() < 0.5);
        }
        assert!(make_degradation_sequence(100, 0, &base).is_err());
        assert!(make_degradation_sequence(100, 100, &base).is_err());
    }
}
