//! Behavioral emulation of the acquisition chain: signal conditioning,
//! sample-and-hold, 8-bit ADC, latch, and the printer-port nibble wire
//! protocol.
//!
//! Everything is modeled at the level the host program can observe — an
//! ordered sequence of nibble reads per converted sample — not electrically.
//! Each ADC byte crosses the wire as two reads selected by the D3 line: data
//! bits 0..2 (or 4..6) appear directly on S4..S6, while the top bit of each
//! nibble passes through an inverter before reaching S7.

use crate::error::{Error, Result};
use crate::motor::Waveform;

// ─── Signal conditioning ────────────────────────────────────────────────────

/// Which front-end input a conditioning chain serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Current,
    Speed,
}

impl Channel {
    /// Two-bit multiplexer select code (A, B lines).
    pub fn select_code(self) -> u8 {
        match self {
            Channel::Current => 0b00,
            Channel::Speed => 0b01,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Current => "current",
            Channel::Speed => "speed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "current" => Ok(Channel::Current),
            "speed" => Ok(Channel::Speed),
            other => Err(Error::Validation(format!("unknown channel `{other}`"))),
        }
    }
}

/// Front-end gains ahead of the multiplexer.
///
/// Current path: CT ratio into a burden resistor, through an inverting
/// amplifier whose flip is undone by the buffer ahead of the ADC — the net
/// polarity is positive-in/positive-out, so [`condition`] reports the net
/// voltage. Speed path: tachometer volts per rpm into a resistive divider.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningChain {
    pub channel: Channel,
    pub ct_ratio: f64,
    pub burden_ohm: f64,
    pub speed_divider: f64,
    pub tach_volts_per_rpm: f64,
    pub inverting: bool,
}

impl ConditioningChain {
    /// Current chain: 10/4 CT into 1 ohm, inverting stage present.
    pub fn current_default() -> Self {
        Self {
            channel: Channel::Current,
            ct_ratio: 10.0 / 4.0,
            burden_ohm: 1.0,
            speed_divider: 1.0 / 18.0,
            tach_volts_per_rpm: 0.06,
            inverting: true,
        }
    }

    /// Speed chain: 0.06 V/rpm tachometer into a 1/18 divider.
    pub fn speed_default() -> Self {
        Self {
            channel: Channel::Speed,
            ct_ratio: 10.0 / 4.0,
            burden_ohm: 1.0,
            speed_divider: 1.0 / 18.0,
            tach_volts_per_rpm: 0.06,
            inverting: false,
        }
    }

    pub fn for_channel(channel: Channel) -> Self {
        match channel {
            Channel::Current => Self::current_default(),
            Channel::Speed => Self::speed_default(),
        }
    }
}

/// Map a physical value (amps or rpm) to the voltage presented to the ADC.
///
/// Out-of-range voltages are not clamped here; clamping is the converter's
/// job and is counted there.
pub fn condition(chain: &ConditioningChain, physical_value: f64) -> f64 {
    match chain.channel {
        Channel::Speed => physical_value * chain.tach_volts_per_rpm * chain.speed_divider,
        Channel::Current => {
            let v = physical_value / chain.ct_ratio * chain.burden_ohm;
            // The inverting amplifier flips the CT signal; the buffer ahead
            // of the converter flips it back, so the net polarity is
            // positive-in/positive-out either way.
            let inverter_out = if chain.inverting { -v } else { v };
            if chain.inverting {
                -inverter_out
            } else {
                inverter_out
            }
        }
    }
}

// ─── Sample-and-hold ────────────────────────────────────────────────────────

/// Zero-order hold at `hold_rate_hz`, reported at the input rate.
///
/// Each output sample carries the input value latched at the most recent
/// hold instant. With `hold_rate == sample_rate` this is the identity.
pub fn sample_hold(w: &Waveform, hold_rate_hz: f64) -> Result<Waveform> {
    if !hold_rate_hz.is_finite() || hold_rate_hz <= 0.0 {
        return Err(Error::Domain("hold rate must be positive".into()));
    }
    if hold_rate_hz > w.sample_rate_hz() {
        return Err(Error::Domain(format!(
            "hold rate {hold_rate_hz} Hz above the input rate {} Hz",
            w.sample_rate_hz()
        )));
    }
    let fs = w.sample_rate_hz();
    let samples = w.samples();
    let out = (0..samples.len())
        .map(|i| {
            let hold_index = (i as f64 * hold_rate_hz / fs).floor();
            let source = (hold_index * fs / hold_rate_hz).floor() as usize;
            samples[source.min(samples.len() - 1)]
        })
        .collect();
    Waveform::new(fs, out)
}

// ─── ADC ────────────────────────────────────────────────────────────────────

/// 8-bit converter configuration: full scale maps v_min to 00h and v_max
/// to FFh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcConfig {
    pub bits: u32,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self {
            bits: 8,
            v_min: 0.0,
            v_max: 5.0,
        }
    }
}

impl AdcConfig {
    pub fn new(bits: u32, v_min: f64, v_max: f64) -> Result<Self> {
        if bits != 8 {
            return Err(Error::Config(
                "only the 8-bit conversion mode is modeled".into(),
            ));
        }
        if !v_min.is_finite() || !v_max.is_finite() || v_max <= v_min {
            return Err(Error::Config(format!(
                "v_max {v_max} must exceed v_min {v_min}"
            )));
        }
        Ok(Self { bits, v_min, v_max })
    }

    pub fn full_scale(&self) -> f64 {
        self.v_max - self.v_min
    }

    /// One least-significant-bit step in volts.
    pub fn lsb_volts(&self) -> f64 {
        self.full_scale() / 255.0
    }
}

/// Quantize a voltage to an 8-bit code, round half up, clamping to range.
pub fn quantize(cfg: &AdcConfig, volts: f64) -> u8 {
    let clamped = volts.clamp(cfg.v_min, cfg.v_max);
    let scaled = (clamped - cfg.v_min) / cfg.full_scale() * 255.0;
    (scaled + 0.5).floor().min(255.0) as u8
}

/// Whether a voltage would be clamped by the converter.
pub fn saturates(cfg: &AdcConfig, volts: f64) -> bool {
    volts < cfg.v_min || volts > cfg.v_max
}

/// Voltage at the center of a code's quantization level.
pub fn dequantize(cfg: &AdcConfig, code: u8) -> f64 {
    cfg.v_min + code as f64 / 255.0 * cfg.full_scale()
}

// ─── Nibble wire protocol ───────────────────────────────────────────────────

/// One host read of the status lines while D3 selects a nibble.
///
/// `s4_s6` carries the nibble's low three bits directly; `s7` carries the
/// nibble's top bit inverted (the latch's Q3/Q7 output passes through an
/// inverter on its way to the port).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NibbleRead {
    pub select_high: bool,
    pub s4_s6: u8,
    pub s7: u8,
}

impl NibbleRead {
    /// The 4-bit value this read encodes.
    pub fn nibble(&self) -> u8 {
        (self.s4_s6 & 0b111) | (((self.s7 ^ 1) & 1) << 3)
    }
}

/// Split a byte into its two wire reads (low nibble first).
pub fn encode_nibbles(code: u8) -> (NibbleRead, NibbleRead) {
    let low = NibbleRead {
        select_high: false,
        s4_s6: code & 0b111,
        s7: ((code >> 3) & 1) ^ 1,
    };
    let high = NibbleRead {
        select_high: true,
        s4_s6: (code >> 4) & 0b111,
        s7: ((code >> 7) & 1) ^ 1,
    };
    (low, high)
}

/// Reassemble a byte from its two wire reads.
///
/// The reads must arrive with the select flags the protocol prescribes;
/// anything else is a protocol error.
pub fn decode_nibbles(low: &NibbleRead, high: &NibbleRead) -> Result<u8> {
    if low.select_high || !high.select_high {
        return Err(Error::Protocol(format!(
            "nibble select flags wrong or swapped (low.select_high={}, high.select_high={})",
            low.select_high, high.select_high
        )));
    }
    Ok(low.nibble() | (high.nibble() << 4))
}

// ─── Capture pipeline ───────────────────────────────────────────────────────

/// A completed acquisition: quantized codes plus the nibble-level wire trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DaqCapture {
    pub channel_select: u8,
    pub sample_rate_hz: f64,
    pub codes: Vec<u8>,
    pub wire_trace: Vec<NibbleRead>,
    /// Number of samples the converter clamped.
    pub saturation_count: usize,
}

impl DaqCapture {
    /// Reconstruct the code sequence from the wire trace alone.
    pub fn decode_trace(&self) -> Result<Vec<u8>> {
        if self.wire_trace.len() != 2 * self.codes.len() {
            return Err(Error::Protocol(format!(
                "trace has {} reads for {} codes",
                self.wire_trace.len(),
                self.codes.len()
            )));
        }
        self.wire_trace
            .chunks(2)
            .map(|pair| decode_nibbles(&pair[0], &pair[1]))
            .collect()
    }

    /// De-quantized voltage sequence.
    pub fn volts(&self, cfg: &AdcConfig) -> Vec<f64> {
        self.codes.iter().map(|&c| dequantize(cfg, c)).collect()
    }
}

/// Run a physical waveform through the full chain:
/// condition, sample-and-hold, quantize, and nibble encoding per sample.
pub fn capture(
    w: &Waveform,
    chain: &ConditioningChain,
    cfg: &AdcConfig,
    channel_select: u8,
) -> Result<DaqCapture> {
    if channel_select > 0b11 {
        return Err(Error::Validation(format!(
            "channel select {channel_select:#04b} is not a 2-bit code"
        )));
    }
    if channel_select != chain.channel.select_code() {
        return Err(Error::Config(format!(
            "channel select {channel_select:#04b} does not match the {} chain ({:#04b})",
            chain.channel.as_str(),
            chain.channel.select_code()
        )));
    }
    let conditioned = Waveform::new(
        w.sample_rate_hz(),
        w.samples().iter().map(|&x| condition(chain, x)).collect(),
    )?;
    let held = sample_hold(&conditioned, conditioned.sample_rate_hz())?;

    let mut codes = Vec::with_capacity(held.len());
    let mut wire_trace = Vec::with_capacity(2 * held.len());
    let mut saturation_count = 0usize;
    for &v in held.samples() {
        if saturates(cfg, v) {
            saturation_count += 1;
        }
        let code = quantize(cfg, v);
        let (low, high) = encode_nibbles(code);
        codes.push(code);
        wire_trace.push(low);
        wire_trace.push(high);
    }
    Ok(DaqCapture {
        channel_select,
        sample_rate_hz: w.sample_rate_hz(),
        codes,
        wire_trace,
        saturation_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_conditioning_matches_tachometer_chain() {
        let chain = ConditioningChain::speed_default();
        // 2800 rpm -> 168 V at the tach -> 9.333 V after the divider.
        let v = condition(&chain, 2800.0);
        assert!((v - 168.0 / 18.0).abs() < 1e-12, "got {v}");
        assert_eq!(condition(&chain, 0.0), 0.0);
    }

    #[test]
    fn current_conditioning_gives_four_volts_at_ten_amps() {
        let chain = ConditioningChain::current_default();
        assert!((condition(&chain, 10.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn hold_at_input_rate_is_identity() {
        let w = Waveform::new(100.0, (0..10).map(|i| i as f64).collect()).unwrap();
        let held = sample_hold(&w, 100.0).unwrap();
        assert_eq!(held.samples(), w.samples());
    }

    #[test]
    fn hold_at_fifth_rate_makes_plateaus() {
        let w = Waveform::new(10.0, (0..10).map(|i| i as f64 / 9.0).collect()).unwrap();
        let held = sample_hold(&w, 2.0).unwrap();
        let expect: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 5.0 / 9.0 }).collect();
        assert_eq!(held.samples(), expect);
    }

    #[test]
    fn hold_above_input_rate_is_rejected() {
        let w = Waveform::new(10.0, vec![0.0; 4]).unwrap();
        assert!(matches!(sample_hold(&w, 20.0), Err(Error::Domain(_))));
    }

    #[test]
    fn quantize_endpoints_and_midpoint() {
        let cfg = AdcConfig::default();
        assert_eq!(quantize(&cfg, 0.0), 0x00);
        assert_eq!(quantize(&cfg, 5.0), 0xFF);
        // 2.5 V scales to 127.5, which rounds half-up to 128.
        assert_eq!(quantize(&cfg, 2.5), 0x80);
        assert_eq!(quantize(&cfg, 7.2), 0xFF);
        assert!(saturates(&cfg, 7.2));
        assert!(!saturates(&cfg, 4.9));
    }

    #[test]
    fn quantize_is_monotone_with_256_levels() {
        let cfg = AdcConfig::default();
        let mut seen = std::collections::HashSet::new();
        let mut prev = 0u8;
        for i in 0..=5000 {
            let v = 5.0 * i as f64 / 5000.0;
            let code = quantize(&cfg, v);
            assert!(code >= prev, "not monotone at {v}");
            prev = code;
            seen.insert(code);
        }
        assert_eq!(seen.len(), 256);
    }

    #[test]
    fn quantization_error_is_within_half_lsb() {
        let cfg = AdcConfig::default();
        let half_lsb = cfg.lsb_volts() / 2.0;
        for i in 0..=10_000 {
            let v = 5.0 * i as f64 / 10_000.0;
            let back = dequantize(&cfg, quantize(&cfg, v));
            assert!(
                (back - v).abs() <= half_lsb + 1e-12,
                "error {} at {v}",
                (back - v).abs()
            );
        }
    }

    #[test]
    fn nibble_encoding_matches_bit_map() {
        let (low, high) = encode_nibbles(0xA5);
        assert_eq!((low.s4_s6, low.s7), (0b101, 1));
        assert_eq!((high.s4_s6, high.s7), (0b010, 0));
        let (low, high) = encode_nibbles(0xFF);
        assert_eq!((low.s4_s6, low.s7), (0b111, 0));
        assert_eq!((high.s4_s6, high.s7), (0b111, 0));
        let (low, high) = encode_nibbles(0x00);
        assert_eq!((low.s4_s6, low.s7), (0b000, 1));
        assert_eq!((high.s4_s6, high.s7), (0b000, 1));
    }

    #[test]
    fn nibble_round_trip_is_exhaustive() {
        for code in 0..=255u8 {
            let (low, high) = encode_nibbles(code);
            assert_eq!(decode_nibbles(&low, &high).unwrap(), code);
        }
    }

    #[test]
    fn swapped_reads_are_a_protocol_error() {
        let (low, high) = encode_nibbles(0x37);
        assert!(matches!(
            decode_nibbles(&high, &low),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn capture_of_zero_waveform_is_all_zero_codes() {
        let w = Waveform::new(3250.0, vec![0.0; 65]).unwrap();
        let chain = ConditioningChain::current_default();
        let cap = capture(&w, &chain, &AdcConfig::default(), 0b00).unwrap();
        assert!(cap.codes.iter().all(|&c| c == 0x00));
        assert_eq!(cap.wire_trace.len(), 130);
    }

    #[test]
    fn capture_peak_code_matches_conditioned_amplitude() {
        // A 10 A peak sine conditions to 4 V peak; 4/5 of full scale is CCh.
        let fs = 3250.0;
        let samples: Vec<f64> = (0..390)
            .map(|i| 10.0 * (2.0 * std::f64::consts::PI * 50.0 * i as f64 / fs).sin())
            .collect();
        let w = Waveform::new(fs, samples).unwrap();
        let chain = ConditioningChain::current_default();
        let cap = capture(&w, &chain, &AdcConfig::default(), 0b00).unwrap();
        assert_eq!(*cap.codes.iter().max().unwrap(), 0xCC);
        // Negative half-cycles clamp at zero and are counted.
        assert!(cap.saturation_count > 0);
    }

    #[test]
    fn capture_trace_decodes_to_codes() {
        let fs = 1000.0;
        let samples: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin() * 6.0).collect();
        let w = Waveform::new(fs, samples).unwrap();
        let chain = ConditioningChain::current_default();
        let cap = capture(&w, &chain, &AdcConfig::default(), 0b00).unwrap();
        assert_eq!(cap.decode_trace().unwrap(), cap.codes);
    }

    #[test]
    fn capture_rejects_mismatched_channel_select() {
        let w = Waveform::new(100.0, vec![0.0; 4]).unwrap();
        let chain = ConditioningChain::current_default();
        assert!(capture(&w, &chain, &AdcConfig::default(), 0b01).is_err());
        assert!(capture(&w, &chain, &AdcConfig::default(), 0b100).is_err());
    }
}
