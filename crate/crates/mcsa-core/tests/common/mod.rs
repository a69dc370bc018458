//! Shared oracles and helpers for the integration suites.
//!
//! The direct O(N^2) DFT here is the independent reference the transform is
//! judged against; it deliberately shares no code with the implementation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct evaluation of X[j] = sum_i x[i] exp(-2 pi i * ij / n), zero-padding
/// the input to length n.
pub fn dft_oracle(x: &[f64], n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|j| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (i, &xi) in x.iter().enumerate() {
                let angle = -2.0 * PI * (i as f64) * (j as f64) / n as f64;
                re += xi * angle.cos();
                im += xi * angle.sin();
            }
            (re, im)
        })
        .collect()
}

/// Max bin-wise magnitude difference, relative to the oracle's peak magnitude.
pub fn relative_spectrum_error(got: &[(f64, f64)], oracle: &[(f64, f64)]) -> f64 {
    assert_eq!(got.len(), oracle.len());
    let peak = oracle
        .iter()
        .map(|&(re, im)| (re * re + im * im).sqrt())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    got.iter()
        .zip(oracle)
        .map(|(&(ar, ai), &(br, bi))| ((ar - br).powi(2) + (ai - bi).powi(2)).sqrt())
        .fold(0.0f64, f64::max)
        / peak
}

/// Deterministic pseudo-random signal in [-1, 1).
pub fn random_signal(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}
