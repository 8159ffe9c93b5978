use csf_core::features::{lp_lq_norm, FaultFrequencies};
use csf_core::simulate::{white_noise, FaultSet, FaultSimConfig};
use csf_core::{convolve_valid, csf_cost, csf_gradient, extract_feature_vector, kurtosis, Signal};
use proptest::prelude::*;

fn naive_convolve(y: &[f64], w: &[f64]) -> Vec<f64> {
    (0..=y.len() - w.len()).map(|i| w.iter().enumerate().map(|(j, wj)| y[i + j] * wj).sum()).collect()
}

fn naive_kurtosis(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn bursty(n: usize, seed: u64) -> Vec<f64> {
    let noise = white_noise(n, seed);
    (0..n).map(|i| noise[i] + if i % 97 < 3 { 6.0 } else { 0.0 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_matches_direct_sum(seed in 0u64..10_000, n in 4usize..200, l_frac in 0.0f64..1.0) {
        let y = white_noise(n, seed);
        let l = 2 + ((n / 2 - 2) as f64 * l_frac) as usize;
        let w = white_noise(l, seed + 1);
        let fast = convolve_valid(&y, &w).unwrap();
        let slow = naive_convolve(&y, &w);
        prop_assert_eq!(fast.len(), n - l + 1);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn cost_lies_between_one_and_sqrt_dim(seed in 0u64..10_000, n in 1usize..400, spikes in 0usize..4) {
        let mut f = white_noise(n, seed);
        for k in 0..spikes {
            f[(k * 31) % n] += 1e4;
        }
        let c = csf_cost(&f, 1e-8).unwrap();
        prop_assert!(c >= 1.0 - 1e-12);
        prop_assert!(c <= (n as f64).sqrt() + 1e-3);
    }

    #[test]
    fn l1_l2_is_scale_invariant(seed in 0u64..10_000, n in 4usize..300, k in prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6]) {
        let f = white_noise(n, seed);
        let g: Vec<f64> = f.iter().map(|v| k * v).collect();
        prop_assert!(rel(lp_lq_norm(&f, 1.0, 2.0).unwrap(), lp_lq_norm(&g, 1.0, 2.0).unwrap()) < 1e-9);
        prop_assert!(rel(lp_lq_norm(&f, 2.0, 4.0).unwrap(), lp_lq_norm(&g, 2.0, 4.0).unwrap()) < 1e-9);
        prop_assert!(rel(kurtosis(&f).unwrap(), kurtosis(&g).unwrap()) < 1e-9);
    }

    #[test]
    fn kurtosis_agrees_with_moment_formula(seed in 0u64..10_000, n in 4usize..500) {
        let x = bursty(n, seed);
        prop_assert!(rel(kurtosis(&x).unwrap(), naive_kurtosis(&x)) < 1e-10);
    }

    #[test]
    fn kurtosis_is_n_over_j24_squared(seed in 0u64..10_000, n in 4usize..500, offset in -10.0f64..10.0) {
        let x: Vec<f64> = bursty(n, seed).iter().map(|v| v + offset).collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let j24 = lp_lq_norm(&centered, 2.0, 4.0).unwrap();
        prop_assert!(rel(kurtosis(&x).unwrap(), n as f64 / (j24 * j24)) < 1e-9);
    }

    #[test]
    fn gradient_matches_central_differences(seed in 0u64..10_000, n in 16usize..160, l in 2usize..8, eps in prop_oneof![Just(1e-4), Just(1e-2)]) {
        // With epsilon = 1e-8 the soft absolute value bends sharply enough
        // that an output sample within ~1e-4 of zero spoils differencing.
        let y = white_noise(n, seed);
        let w = white_noise(l, seed ^ 0x5555);
        let g = csf_gradient(&y, &w, eps).unwrap();
        let h = 1e-6;
        let cost = |w: &[f64]| csf_cost(&naive_convolve(&y, w), eps).unwrap();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..l {
            let mut p = w.clone();
            let mut m = w.clone();
            p[j] += h;
            m[j] -= h;
            let fd = (cost(&p) - cost(&m)) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn gradient_is_orthogonal_to_w(seed in 0u64..10_000, n in 16usize..200, l in 2usize..8) {
        // The cost is invariant to scaling w, so its gradient has no radial part.
        let y = white_noise(n, seed);
        let w = white_noise(l, seed + 7);
        let g = csf_gradient(&y, &w, 1e-12).unwrap();
        let dot: f64 = g.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norms = g.iter().map(|v| v * v).sum::<f64>().sqrt() * w.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(dot.abs() <= 1e-6 * norms.max(1e-300));
    }
}

#[test]
fn features_are_invariant_to_amplitude() {
    let faults = FaultFrequencies::new(100.0, 160.0, 70.0).unwrap();
    let config = FaultSimConfig { faults: FaultSet::OUTER, snr_db: -3.0, n_samples: 8192, seed: 4, ..Default::default() };
    let signal = csf_core::simulate::simulate_bearing_fault(&config).unwrap();
    let base = extract_feature_vector(&signal, &faults, 0.02).unwrap().to_array();
    for k in [1e-6, 3.7, 1e6, -2.0] {
        let scaled = extract_feature_vector(&signal.scaled(k).unwrap(), &faults, 0.02).unwrap().to_array();
        for (a, b) in base.iter().zip(scaled) {
            assert!(rel(*a, b) < 1e-9, "k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn extreme_vectors_hit_the_cost_bounds() {
    let mut spike = vec![0.0; 256];
    spike[17] = 1.0;
    // Each zero entry contributes sqrt(epsilon) to the l1 sum.
    let expected = ((1.0f64 + 1e-8).sqrt() + 255.0 * 1e-4) / (1.0f64 + 256.0 * 1e-8).sqrt();
    assert!(rel(csf_cost(&spike, 1e-8).unwrap(), expected) < 1e-12);
    assert!((csf_cost(&spike, 1e-16).unwrap() - 1.0).abs() < 1e-5);
    let flat = vec![0.3; 256];
    assert!((csf_cost(&flat, 1e-8).unwrap() - 16.0).abs() < 1e-9);
    let alternating: Vec<f64> = (0..256).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    assert!((csf_cost(&alternating, 1e-8).unwrap() - 16.0).abs() < 1e-9);
}

#[test]
fn signal_scaling_is_exact_for_powers_of_two() {
    let s = Signal::new(white_noise(64, 3), 1000.0).unwrap();
    let t = s.scaled(-4.0).unwrap();
    for (a, b) in s.samples().iter().zip(t.samples()) {
        assert_eq!(*b, -4.0 * a);
    }
}
