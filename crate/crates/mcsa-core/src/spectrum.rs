//! Windowed discrete Fourier analysis and peak amplitude extraction.
//!
//! The lab procedure samples six mains cycles at 65 points per cycle
//! (390 samples, 3250 Hz) and reads sideband amplitudes off the one-sided
//! spectrum. 390 is not a power of two, so the transform must be correct for
//! arbitrary lengths; the implementation delegates to a mixed-radix FFT and
//! is checked in the test suite against a direct O(N^2) DFT oracle.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::motor::Waveform;

// ─── Windows ────────────────────────────────────────────────────────────────

/// Analysis window. Hann is the measurement default (real signals leak);
/// rectangular keeps bin-exact synthetic tones exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    /// Amplitude correction dividing out the window's coherent gain.
    pub fn coherent_gain_correction(self) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 2.0,
        }
    }

    /// Equivalent noise bandwidth in bins; the normalizer for energy-based
    /// amplitude estimates.
    pub fn enbw_bins(self) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 1.5,
        }
    }

    /// Window value at sample i of n (periodic form, exact coherent gain).
    fn value(self, i: usize, n: usize) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Window::Rectangular => "rect",
            Window::Hann => "hann",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rect" | "rectangular" => Ok(Window::Rectangular),
            "hann" => Ok(Window::Hann),
            other => Err(Error::Validation(format!("unknown window `{other}`"))),
        }
    }
}

// ─── Types ──────────────────────────────────────────────────────────────────

/// One-sided amplitude spectrum with window-gain correction applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bin_hz: f64,
    amplitudes: Vec<f64>,
    n_fft: usize,
    window: Window,
    sample_rate_hz: f64,
}

impl Spectrum {
    pub fn bin_hz(&self) -> f64 {
        self.bin_hz
    }

    /// Corrected one-sided amplitudes, floor(n_fft/2) + 1 bins.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    pub fn freq_of_bin(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }
}

/// Result of a targeted peak measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMeasurement {
    pub target_hz: f64,
    /// Center frequency of the peak bin; no interpolation between bins.
    pub found_hz: f64,
    pub amplitude: f64,
    /// Peak bin minus target bin.
    pub bin_offset: i64,
}

/// Sampling grid derived from a cycle count and per-cycle resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    pub sample_time_s: f64,
}

/// Derive the sampling grid: n = cycles * samples_per_cycle,
/// Ts = period / samples_per_cycle, Fs = 1 / Ts.
pub fn sampling_plan(
    cycles: usize,
    samples_per_cycle: usize,
    cycle_period_s: f64,
) -> Result<SamplingPlan> {
    if cycles == 0 || samples_per_cycle == 0 || !cycle_period_s.is_finite() || cycle_period_s <= 0.0 {
        return Err(Error::Domain(
            "cycles, samples per cycle, and cycle period must be positive".into(),
        ));
    }
    Ok(SamplingPlan {
        n_samples: cycles * samples_per_cycle,
        sample_rate_hz: samples_per_cycle as f64 / cycle_period_s,
        sample_time_s: cycle_period_s / samples_per_cycle as f64,
    })
}

// ─── Transform ──────────────────────────────────────────────────────────────

/// Forward DFT of a real signal, zero-padded (or truncated) to `n_fft`.
///
/// Returns all `n_fft` complex bins as (re, im) with the plain convention
/// `X[j] = sum_i x[i] exp(-2 pi i * ij / n_fft)` (no normalization).
/// Correct for arbitrary `n_fft`, not just powers of two.
pub fn dft(samples: &[f64], n_fft: usize) -> Vec<(f64, f64)> {
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n_fft)
        .collect();
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    buf.into_iter().map(|c| (c.re, c.im)).collect()
}

/// Windowed one-sided amplitude spectrum of a waveform.
///
/// Amplitudes are scaled so a full-scale sinusoid at a bin center reads its
/// time-domain amplitude: interior bins get `corr * 2 |X[j]| / N`, the DC and
/// Nyquist bins `corr * |X[j]| / N`, where N is the (pre-padding) sample
/// count and `corr` divides out the window's coherent gain.
pub fn transform(w: &Waveform, window: Window, n_fft: Option<usize>) -> Result<Spectrum> {
    let n_sig = w.len();
    if n_sig == 0 {
        return Err(Error::Domain("cannot transform an empty waveform".into()));
    }
    let n_fft = n_fft.unwrap_or(n_sig);
    if n_fft < n_sig {
        return Err(Error::Domain(format!(
            "n_fft {n_fft} smaller than the waveform length {n_sig}"
        )));
    }
    let windowed: Vec<f64> = w
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &x)| x * window.value(i, n_sig))
        .collect();
    let bins = dft(&windowed, n_fft);

    let corr = window.coherent_gain_correction();
    let n_eff = n_sig as f64;
    let n_half = n_fft / 2;
    let mut amplitudes = Vec::with_capacity(n_half + 1);
    for (j, &(re, im)) in bins.iter().take(n_half + 1).enumerate() {
        let mag = (re * re + im * im).sqrt();
        let is_edge = j == 0 || (n_fft.is_multiple_of(2) && j == n_half);
        let scale = if is_edge { 1.0 } else { 2.0 };
        amplitudes.push(corr * scale * mag / n_eff);
    }
    Ok(Spectrum {
        bin_hz: w.sample_rate_hz() / n_fft as f64,
        amplitudes,
        n_fft,
        window,
        sample_rate_hz: w.sample_rate_hz(),
    })
}

// ─── Peak measurement ───────────────────────────────────────────────────────

/// Measure the amplitude of a spectral component near a target frequency.
///
/// The peak bin is the maximum-amplitude bin within `half_width_bins` of the
/// target bin, ties broken toward the target. The reported amplitude is the
/// root-sum-square of the corrected amplitudes within `half_width_bins` of
/// the peak, normalized by the window's equivalent noise bandwidth, which
/// recovers a tone's amplitude regardless of where it falls between bin
/// centers. `found_hz` is the peak bin center; frequency is never
/// interpolated.
pub fn measure_peak(
    s: &Spectrum,
    target_hz: f64,
    half_width_bins: usize,
) -> Result<PeakMeasurement> {
    if half_width_bins == 0 {
        return Err(Error::Domain("half width must be >= 1 bin".into()));
    }
    if !target_hz.is_finite() || target_hz < 0.0 || target_hz >= s.nyquist_hz() {
        return Err(Error::Domain(format!(
            "target {target_hz} Hz outside [0, Nyquist = {} Hz)",
            s.nyquist_hz()
        )));
    }
    let n_bins = s.amplitudes.len() as i64;
    let target_bin = ((target_hz / s.bin_hz).round() as i64).clamp(0, n_bins - 1);
    let hw = half_width_bins as i64;

    // Visit candidates in order of distance from the target so that strict
    // improvement keeps ties on the target side.
    let mut peak_bin = target_bin;
    let mut peak_amp = s.amplitudes[target_bin as usize];
    for dist in 1..=hw {
        for bin in [target_bin - dist, target_bin + dist] {
            if (0..n_bins).contains(&bin) && s.amplitudes[bin as usize] > peak_amp {
                peak_bin = bin;
                peak_amp = s.amplitudes[bin as usize];
            }
        }
    }

    let lo = (peak_bin - hw).max(0) as usize;
    let hi = (peak_bin + hw).min(n_bins - 1) as usize;
    let energy: f64 = s.amplitudes[lo..=hi].iter().map(|a| a * a).sum();
    let amplitude = (energy / s.window.enbw_bins()).sqrt();

    Ok(PeakMeasurement {
        target_hz,
        found_hz: s.freq_of_bin(peak_bin as usize),
        amplitude,
        bin_offset: peak_bin - target_bin,
    })
}
