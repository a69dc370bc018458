//! Motor nameplate data, slip arithmetic, and synthesis of healthy/faulted
//! stator-current waveforms.
//!
//! A faulted line current is modelled as the mains fundamental plus a set of
//! injected spectral components (one per fault sideband) plus optional
//! additive Gaussian noise. Synthesis stands in for the physical motor and
//! current transformer of the lab rig, so the downstream spectral pipeline
//! can be exercised against known ground truth.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::features::{FixtureCase, FixtureTable};

/// Relative tolerance for the nameplate consistency check ns = 60 f / p.
const SYNC_SPEED_RTOL: f64 = 1e-9;

// ─── Nameplate and operating-point types ───────────────────────────────────

/// Nameplate and electrical constants of the machine under test.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorParams {
    pole_pairs: u32,
    supply_freq_hz: f64,
    sync_speed_rpm: f64,
    rated_kw: f64,
    rated_current_a: f64,
}

impl MotorParams {
    /// Build a parameter set, rejecting triples that violate ns = 60 f / p.
    pub fn new(
        pole_pairs: u32,
        supply_freq_hz: f64,
        sync_speed_rpm: f64,
        rated_kw: f64,
        rated_current_a: f64,
    ) -> Result<Self> {
        if pole_pairs < 1 {
            return Err(Error::Validation("pole_pairs must be >= 1".into()));
        }
        for (name, v) in [
            ("supply_freq_hz", supply_freq_hz),
            ("sync_speed_rpm", sync_speed_rpm),
            ("rated_kw", rated_kw),
            ("rated_current_a", rated_current_a),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Validation(format!("{name} must be positive")));
            }
        }
        let expected = 60.0 * supply_freq_hz / pole_pairs as f64;
        if (sync_speed_rpm - expected).abs() > SYNC_SPEED_RTOL * expected {
            return Err(Error::Validation(format!(
                "sync_speed_rpm {sync_speed_rpm} inconsistent with 60*f/p = {expected}"
            )));
        }
        Ok(Self {
            pole_pairs,
            supply_freq_hz,
            sync_speed_rpm,
            rated_kw,
            rated_current_a,
        })
    }

    /// Build a parameter set with the synchronous speed derived from f and p.
    pub fn from_supply(
        pole_pairs: u32,
        supply_freq_hz: f64,
        rated_kw: f64,
        rated_current_a: f64,
    ) -> Result<Self> {
        let ns = 60.0 * supply_freq_hz / pole_pairs.max(1) as f64;
        Self::new(pole_pairs, supply_freq_hz, ns, rated_kw, rated_current_a)
    }

    /// The 2.2 kW, 50 Hz, 2-pole lab machine used throughout the test rig.
    pub fn lab_motor() -> Self {
        Self::from_supply(1, 50.0, 2.2, 8.0).expect("lab motor constants are valid")
    }

    pub fn pole_pairs(&self) -> u32 {
        self.pole_pairs
    }

    pub fn supply_freq_hz(&self) -> f64 {
        self.supply_freq_hz
    }

    pub fn sync_speed_rpm(&self) -> f64 {
        self.sync_speed_rpm
    }

    pub fn rated_kw(&self) -> f64 {
        self.rated_kw
    }

    pub fn rated_current_a(&self) -> f64 {
        self.rated_current_a
    }
}

/// Slip operating point: rotor speed, slip, and slip frequency f2 = s * f1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipState {
    rotor_speed_rpm: f64,
    slip: f64,
    slip_freq_hz: f64,
}

impl SlipState {
    /// Build a slip state directly from a slip value in [0, 1].
    ///
    /// The rotor speed is derived as nr = ns * (1 - s). Used when a table or
    /// the command line supplies the slip instead of a measured speed.
    pub fn from_slip(params: &MotorParams, slip: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&slip) || !slip.is_finite() {
            return Err(Error::Domain(format!("slip {slip} outside [0, 1]")));
        }
        Ok(Self {
            rotor_speed_rpm: params.sync_speed_rpm * (1.0 - slip),
            slip,
            slip_freq_hz: slip * params.supply_freq_hz,
        })
    }

    pub fn rotor_speed_rpm(&self) -> f64 {
        self.rotor_speed_rpm
    }

    pub fn slip(&self) -> f64 {
        self.slip
    }

    pub fn slip_freq_hz(&self) -> f64 {
        self.slip_freq_hz
    }
}

/// Compute the slip state for a measured rotor speed.
///
/// Slip is carried at full precision; three-digit table values are treated
/// as display rounding. Supersynchronous speeds are rejected rather than
/// extrapolated.
pub fn compute_slip(params: &MotorParams, rotor_speed_rpm: f64) -> Result<SlipState> {
    if !rotor_speed_rpm.is_finite() || rotor_speed_rpm < 0.0 {
        return Err(Error::Domain(format!(
            "rotor speed {rotor_speed_rpm} rpm must be nonnegative"
        )));
    }
    if rotor_speed_rpm > params.sync_speed_rpm {
        return Err(Error::Domain(format!(
            "rotor speed {rotor_speed_rpm} rpm above synchronous {} rpm (supersynchronous \
             operation out of scope)",
            params.sync_speed_rpm
        )));
    }
    let slip = (params.sync_speed_rpm - rotor_speed_rpm) / params.sync_speed_rpm;
    Ok(SlipState {
        rotor_speed_rpm,
        slip,
        slip_freq_hz: slip * params.supply_freq_hz,
    })
}

// ─── Fault signatures ───────────────────────────────────────────────────────

/// Fault condition labels. Ordering defines the classifier's class indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultLabel {
    Healthy,
    InterTurnMinor,
    InterTurnSevere,
    BrokenBar,
}

/// Class ordering used by the classifier output layer.
pub const CLASS_ORDER: [FaultLabel; 4] = [
    FaultLabel::Healthy,
    FaultLabel::InterTurnMinor,
    FaultLabel::InterTurnSevere,
    FaultLabel::BrokenBar,
];

impl FaultLabel {
    /// Index of this label in [`CLASS_ORDER`].
    pub fn class_index(self) -> usize {
        CLASS_ORDER
            .iter()
            .position(|l| *l == self)
            .expect("label present in CLASS_ORDER")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FaultLabel::Healthy => "healthy",
            FaultLabel::InterTurnMinor => "inter_turn_minor",
            FaultLabel::InterTurnSevere => "inter_turn_severe",
            FaultLabel::BrokenBar => "broken_bar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "healthy" => Ok(FaultLabel::Healthy),
            "inter_turn_minor" => Ok(FaultLabel::InterTurnMinor),
            "inter_turn_severe" => Ok(FaultLabel::InterTurnSevere),
            "broken_bar" => Ok(FaultLabel::BrokenBar),
            other => Err(Error::Validation(format!("unknown fault label `{other}`"))),
        }
    }
}

impl std::fmt::Display for FaultLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One injected spectral component of a fault signature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralComponent {
    pub freq_hz: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
}

/// A set of spectral components representing one fault condition.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSignature {
    label: FaultLabel,
    components: Vec<SpectralComponent>,
}

impl FaultSignature {
    /// Build a signature; a healthy label must carry no components.
    pub fn new(label: FaultLabel, components: Vec<SpectralComponent>) -> Result<Self> {
        if label == FaultLabel::Healthy && !components.is_empty() {
            return Err(Error::Validation(
                "healthy signature must have an empty component list".into(),
            ));
        }
        for c in &components {
            if !c.freq_hz.is_finite()
                || c.freq_hz < 0.0
                || !c.amplitude.is_finite()
                || c.amplitude < 0.0
                || !c.phase_rad.is_finite()
            {
                return Err(Error::Validation(format!(
                    "component ({}, {}, {}) has a negative or non-finite field",
                    c.freq_hz, c.amplitude, c.phase_rad
                )));
            }
        }
        Ok(Self { label, components })
    }

    /// The no-fault signature.
    pub fn healthy() -> Self {
        Self {
            label: FaultLabel::Healthy,
            components: Vec::new(),
        }
    }

    pub fn label(&self) -> FaultLabel {
        self.label
    }

    pub fn components(&self) -> &[SpectralComponent] {
        &self.components
    }
}

/// Build a fault signature from the harmonic amplitude tables.
///
/// Every table row contributes two components (positive and negative
/// branch) at the printed frequency and amplitude, phase zero. Ten shorted
/// turns map to the minor inter-turn label, thirty to the severe one.
pub fn fault_from_tables(case_id: FixtureCase, fixtures: &[FixtureTable]) -> Result<FaultSignature> {
    let table = fixtures
        .iter()
        .find(|t| t.case_id() == case_id)
        .ok_or_else(|| Error::NotFound(format!("fixture case `{case_id}` not loaded")))?;
    if table.rows().is_empty() {
        return Err(Error::NotFound(format!(
            "fixture case `{case_id}` has no rows"
        )));
    }
    let mut components = Vec::with_capacity(2 * table.rows().len());
    for row in table.rows() {
        components.push(SpectralComponent {
            freq_hz: row.pos_freq_hz,
            amplitude: row.pos_amp,
            phase_rad: 0.0,
        });
        components.push(SpectralComponent {
            freq_hz: row.neg_freq_hz,
            amplitude: row.neg_amp,
            phase_rad: 0.0,
        });
    }
    FaultSignature::new(case_id.fault_label(), components)
}

// ─── Waveforms and synthesis ────────────────────────────────────────────────

/// A uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    sample_rate_hz: f64,
    samples: Vec<f64>,
}

impl Waveform {
    pub fn new(sample_rate_hz: f64, samples: Vec<f64>) -> Result<Self> {
        if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
            return Err(Error::Validation(format!(
                "sample rate {sample_rate_hz} must be positive"
            )));
        }
        if samples.is_empty() {
            return Err(Error::Validation("waveform must have samples".into()));
        }
        Ok(Self {
            sample_rate_hz,
            samples,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Derived, never stored.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// Synthesize a stator-current waveform for a fault condition.
///
/// `samples[i] = A sin(2 pi f1 t_i) + sum_c a_c sin(2 pi f_c t_i + phi_c) + noise`
/// with `t_i = i / fs`. Noise is additive Gaussian drawn from a ChaCha8
/// stream seeded with `seed` (documented so ports can match statistically);
/// `noise_sigma = 0` skips the generator entirely, making the output a pure
/// function of the remaining inputs.
#[allow(clippy::too_many_arguments)]
pub fn synthesize(
    params: &MotorParams,
    slip: &SlipState,
    fault: &FaultSignature,
    fundamental_amp: f64,
    sample_rate_hz: f64,
    n_samples: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Waveform> {
    if !fundamental_amp.is_finite() || fundamental_amp < 0.0 {
        return Err(Error::Validation(
            "fundamental amplitude must be nonnegative".into(),
        ));
    }
    if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 || n_samples == 0 {
        return Err(Error::Validation(
            "sample rate and sample count must be positive".into(),
        ));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::Validation("noise sigma must be nonnegative".into()));
    }
    // The slip state is carried for provenance; reject one that does not
    // belong to these motor params.
    let expected_f2 = slip.slip * params.supply_freq_hz;
    if (slip.slip_freq_hz - expected_f2).abs() > 1e-9 * params.supply_freq_hz {
        return Err(Error::Validation(format!(
            "slip state (f2 = {}) inconsistent with supply frequency {}",
            slip.slip_freq_hz, params.supply_freq_hz
        )));
    }
    let nyquist = sample_rate_hz / 2.0;
    for c in fault.components() {
        if c.freq_hz >= nyquist {
            return Err(Error::Config(format!(
                "fault component at {} Hz (amplitude {}) is not below the Nyquist frequency {} Hz",
                c.freq_hz, c.amplitude, nyquist
            )));
        }
    }
    if params.supply_freq_hz >= nyquist {
        return Err(Error::Config(format!(
            "fundamental at {} Hz is not below the Nyquist frequency {} Hz",
            params.supply_freq_hz, nyquist
        )));
    }

    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t = i as f64 / sample_rate_hz;
        let mut v = fundamental_amp * (2.0 * PI * params.supply_freq_hz * t).sin();
        for c in fault.components() {
            v += c.amplitude * (2.0 * PI * c.freq_hz * t + c.phase_rad).sin();
        }
        samples.push(v);
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma)
            .map_err(|e| Error::Validation(format!("noise distribution: {e}")))?;
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }
    Waveform::new(sample_rate_hz, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::builtin_fixtures;

    fn lab() -> MotorParams {
        MotorParams::lab_motor()
    }

    #[test]
    fn slip_matches_thirty_turn_case() {
        let s = compute_slip(&lab(), 2500.0).unwrap();
        assert!((s.slip() - 1.0 / 6.0).abs() < 1e-12, "slip {}", s.slip());
        assert!((s.slip_freq_hz() - 50.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn slip_zero_at_synchronous_speed() {
        let s = compute_slip(&lab(), 3000.0).unwrap();
        assert_eq!(s.slip(), 0.0);
        assert_eq!(s.slip_freq_hz(), 0.0);
    }

    #[test]
    fn slip_for_2650_rpm_follows_formula_not_printed_value() {
        // The source tables print 0.133 for this speed; the formula gives 7/60.
        let s = compute_slip(&lab(), 2650.0).unwrap();
        assert!((s.slip() - 0.11666666666666667).abs() < 1e-12);
    }

    #[test]
    fn supersynchronous_speed_rejected() {
        assert!(matches!(
            compute_slip(&lab(), 3100.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn negative_speed_rejected() {
        assert!(matches!(compute_slip(&lab(), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn slip_is_monotone_decreasing_in_rotor_speed() {
        let params = lab();
        let mut prev = f64::INFINITY;
        for nr in (0..=3000).step_by(50) {
            let s = compute_slip(&params, nr as f64).unwrap().slip();
            assert!(s < prev, "slip not decreasing at nr={nr}");
            prev = s;
        }
    }

    #[test]
    fn inconsistent_nameplate_rejected() {
        assert!(MotorParams::new(1, 50.0, 2900.0, 2.2, 8.0).is_err());
        assert!(MotorParams::new(2, 50.0, 1500.0, 2.2, 8.0).is_ok());
    }

    #[test]
    fn healthy_signature_must_be_empty() {
        let c = SpectralComponent {
            freq_hz: 92.0,
            amplitude: 0.1,
            phase_rad: 0.0,
        };
        assert!(FaultSignature::new(FaultLabel::Healthy, vec![c]).is_err());
    }

    #[test]
    fn synthesize_healthy_is_pure_tone() {
        let params = lab();
        let slip = compute_slip(&params, 2500.0).unwrap();
        let w = synthesize(
            &params,
            &slip,
            &FaultSignature::healthy(),
            1.0,
            3250.0,
            390,
            0.0,
            1,
        )
        .unwrap();
        assert_eq!(w.len(), 390);
        assert!((w.duration_s() - 0.12).abs() < 1e-12);
        for (i, &s) in w.samples().iter().enumerate() {
            let expect = (2.0 * PI * 50.0 * i as f64 / 3250.0).sin();
            assert!((s - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_zero_amplitude_is_all_zero() {
        let params = lab();
        let slip = compute_slip(&params, 3000.0).unwrap();
        let w = synthesize(
            &params,
            &slip,
            &FaultSignature::healthy(),
            0.0,
            3250.0,
            64,
            0.0,
            9,
        )
        .unwrap();
        assert!(w.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn synthesize_is_reproducible_for_fixed_seed() {
        let params = lab();
        let slip = compute_slip(&params, 2500.0).unwrap();
        let fault = fault_from_tables(FixtureCase::ThirtyTurns, &builtin_fixtures()).unwrap();
        let a = synthesize(&params, &slip, &fault, 1.0, 3250.0, 390, 0.05, 42).unwrap();
        let b = synthesize(&params, &slip, &fault, 1.0, 3250.0, 390, 0.05, 42).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = synthesize(&params, &slip, &fault, 1.0, 3250.0, 390, 0.05, 43).unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn synthesize_amplitude_bound_holds() {
        let params = lab();
        let slip = compute_slip(&params, 2500.0).unwrap();
        let fault = fault_from_tables(FixtureCase::ThirtyTurns, &builtin_fixtures()).unwrap();
        let bound: f64 =
            1.0 + fault.components().iter().map(|c| c.amplitude).sum::<f64>();
        let w = synthesize(&params, &slip, &fault, 1.0, 3250.0, 3900, 0.0, 0).unwrap();
        let peak = w.samples().iter().fold(0.0f64, |m, &s| m.max(s.abs()));
        assert!(peak <= bound + 1e-12, "peak {peak} exceeds bound {bound}");
    }

    #[test]
    fn synthesize_rejects_aliasing_component() {
        let params = lab();
        let slip = compute_slip(&params, 2500.0).unwrap();
        let fault = fault_from_tables(FixtureCase::ThirtyTurns, &builtin_fixtures()).unwrap();
        let err = synthesize(&params, &slip, &fault, 1.0, 100.0, 390, 0.0, 1).unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("Hz"), "message should name the component"),
            other => panic!("expected configuration error, got {other:?}"),
        }
    }

    #[test]
    fn fault_from_tables_carries_printed_rows() {
        let fixtures = builtin_fixtures();
        let severe = fault_from_tables(FixtureCase::ThirtyTurns, &fixtures).unwrap();
        assert_eq!(severe.label(), FaultLabel::InterTurnSevere);
        assert!(severe
            .components()
            .iter()
            .any(|c| c.freq_hz == 92.0 && c.amplitude == 0.1312));
        assert!(severe
            .components()
            .iter()
            .any(|c| c.freq_hz == 8.0 && c.amplitude == 0.396));

        let minor = fault_from_tables(FixtureCase::TenTurns, &fixtures).unwrap();
        assert_eq!(minor.label(), FaultLabel::InterTurnMinor);
        assert!(minor
            .components()
            .iter()
            .any(|c| c.freq_hz == 6.0 && c.amplitude == 0.323));
        assert!(minor
            .components()
            .iter()
            .any(|c| c.freq_hz == 94.0 && c.amplitude == 0.01288));
    }

    #[test]
    fn fault_from_tables_missing_case_is_not_found() {
        assert!(matches!(
            fault_from_tables(FixtureCase::TenTurns, &[]),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn fault_from_tables_rejects_a_rowless_case() {
        // A file can declare a case without printing rows for it.
        let text = "# meta thirty_turns 50 2500 0.166 2.2 1\n\
                    # meta ten_turns 50 2650 0.133 2.2 1\n\
                    ten_turns,1,94,0.01288,6,0.323\n";
        let tables = crate::features::load_fixtures(text).unwrap();
        assert!(matches!(
            fault_from_tables(FixtureCase::ThirtyTurns, &tables),
            Err(Error::NotFound(_))
        ));
    }
}
