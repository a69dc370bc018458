//! Verifies the fast transform against the direct O(N^2) DFT oracle.

mod common;

use common::{dft_oracle, random_signal, relative_spectrum_error};
use mcsa_core::motor::Waveform;
use mcsa_core::spectrum::{dft, measure_peak, transform, Window};

const ORACLE_LENGTHS: [usize; 6] = [1, 2, 3, 13, 390, 1024];

#[test]
fn dft_agrees_with_oracle_on_awkward_lengths() {
    for (i, &n) in ORACLE_LENGTHS.iter().enumerate() {
        let x = random_signal(100 + i as u64, n);
        let got = dft(&x, n);
        let reference = dft_oracle(&x, n);
        let err = relative_spectrum_error(&got, &reference);
        assert!(err < 1e-9, "length {n}: relative error {err}");
    }
}

#[test]
fn dft_agrees_with_oracle_under_zero_padding() {
    let x = random_signal(7, 390);
    for n_fft in [390, 512, 3900] {
        let err = relative_spectrum_error(&dft(&x, n_fft), &dft_oracle(&x, n_fft));
        assert!(err < 1e-9, "n_fft {n_fft}: relative error {err}");
    }
}

#[test]
fn parseval_holds_on_random_390_sample_signals() {
    for seed in 0..100u64 {
        let x = random_signal(seed, 390);
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let freq_energy: f64 = dft(&x, 390)
            .iter()
            .map(|&(re, im)| re * re + im * im)
            .sum::<f64>()
            / 390.0;
        let rel = (time_energy - freq_energy).abs() / time_energy;
        assert!(rel < 1e-9, "seed {seed}: Parseval mismatch {rel}");
    }
}

#[test]
fn parseval_holds_on_prime_lengths() {
    for n in [13usize, 389] {
        let x = random_signal(n as u64, n);
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let freq_energy: f64 = dft(&x, n)
            .iter()
            .map(|&(re, im)| re * re + im * im)
            .sum::<f64>()
            / n as f64;
        let rel = (time_energy - freq_energy).abs() / time_energy;
        assert!(rel < 1e-9, "n {n}: Parseval mismatch {rel}");
    }
}

#[test]
fn one_sided_amplitudes_match_oracle_scaling() {
    // The corrected one-sided spectrum must reproduce the oracle's magnitudes
    // under the documented rectangular-window scaling.
    let x = random_signal(42, 390);
    let w = Waveform::new(3250.0, x.clone()).unwrap();
    let s = transform(&w, Window::Rectangular, None).unwrap();
    let reference = dft_oracle(&x, 390);
    for (j, &amp) in s.amplitudes().iter().enumerate() {
        let (re, im) = reference[j];
        let mag = (re * re + im * im).sqrt();
        let expected = if j == 0 || j == 195 {
            mag / 390.0
        } else {
            2.0 * mag / 390.0
        };
        assert!(
            (amp - expected).abs() < 1e-9 * (1.0 + expected),
            "bin {j}: {amp} vs {expected}"
        );
    }
}

#[test]
fn off_bin_tone_amplitudes_recover_within_five_percent() {
    // Sweep the worst-case fractional bin offsets with a Hann window.
    let fs = 1000.0;
    let n = 1000;
    for tenths in 0..=5 {
        let freq = 100.0 + tenths as f64 / 10.0;
        let samples: Vec<f64> = (0..n)
            .map(|i| 0.37 * (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
            .collect();
        let w = Waveform::new(fs, samples).unwrap();
        let s = transform(&w, Window::Hann, None).unwrap();
        let m = measure_peak(&s, freq, 2).unwrap();
        let rel = (m.amplitude - 0.37).abs() / 0.37;
        assert!(rel < 0.05, "offset {tenths}/10 bin: error {rel}");
        assert!((m.found_hz - freq).abs() <= s.bin_hz());
    }
}
