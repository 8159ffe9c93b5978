//! Complex discrete Fourier transform for arbitrary lengths.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey kernel; every
//! other length goes through Bluestein's chirp-z algorithm on top of it, so
//! record lengths such as 20480 need no padding or truncation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

/// Unnormalized forward transform, `X[k] = sum x[n] exp(-2 pi i k n / N)`.
pub fn forward(buf: &mut [Complex64]) {
    transform(buf, -1.0);
}

/// Inverse transform, normalized by `1/N` so that `inverse(forward(x)) == x`.
pub fn inverse(buf: &mut [Complex64]) {
    transform(buf, 1.0);
    let scale = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Forward transform of a real sequence.
pub fn forward_real(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut buf);
    buf
}

fn transform(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(buf, sign);
    } else {
        bluestein(buf, sign);
    }
}

fn radix2(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());

    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    // Twiddles for the full length; stage `len` strides through them.
    let half_n = n / 2;
    let twiddles: Vec<Complex64> = (0..half_n)
        .map(|k| {
            let angle = sign * 2.0 * PI * k as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let u = buf[start + k];
                let t = buf[start + k + half] * w;
                buf[start + k] = u + t;
                buf[start + k + half] = u - t;
            }
        }
        len <<= 1;
    }
}

fn bluestein(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    let m = (2 * n - 1).next_power_of_two();

    // chirp[k] = exp(sign * i pi k^2 / n); k^2 reduced mod 2n keeps the angle small.
    let modulus = 2 * n as u128;
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % modulus) as f64;
            let angle = sign * PI * k2 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = buf[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        let c = chirp[k].conj();
        b[k] = c;
        b[m - k] = c;
    }

    radix2(&mut a, -1.0);
    radix2(&mut b, -1.0);
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= *y;
    }
    radix2(&mut a, 1.0);
    let scale = 1.0 / m as f64;
    for k in 0..n {
        buf[k] = a[k] * scale * chirp[k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let angle = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                    acc + v * Complex64::new(angle.cos(), angle.sin())
                })
            })
            .collect()
    }

    fn random_complex(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_mixed_lengths() {
        for (i, &n) in [1usize, 2, 3, 5, 8, 12, 17, 64, 100, 243].iter().enumerate() {
            let x = random_complex(n, i as u64);
            let expected = naive_dft(&x);
            let mut got = x.clone();
            forward(&mut got);
            for (g, e) in got.iter().zip(expected.iter()) {
                assert!((g - e).norm() < 1e-9 * (n as f64), "n={n}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for &n in &[16usize, 20, 1000] {
            let x = random_complex(n, 99);
            let mut y = x.clone();
            forward(&mut y);
            inverse(&mut y);
            for (a, b) in x.iter().zip(y.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn parseval_holds() {
        for &n in &[256usize, 20480, 777] {
            let x = random_complex(n, 7);
            let time_energy: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let mut y = x.clone();
            forward(&mut y);
            let freq_energy: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
            assert!(((time_energy - freq_energy) / time_energy).abs() < 1e-9);
        }
    }
}
