//! Harmonic fixture tables and feature-vector extraction.
//!
//! The two shipped tables hold the printed harmonic frequencies and
//! amplitudes for the ten-turn and thirty-turn shorted-winding tests,
//! verbatim, typos included: the tables are the ground truth and any
//! reconciliation lives in code. Feature vectors are fixed-length lists of
//! sideband amplitudes read off a spectrum at a grid's frequencies; they are
//! what the classifier consumes.

use crate::error::{Error, Result};
use crate::motor::{synthesize, FaultLabel, FaultSignature, MotorParams, SlipState};
use crate::sideband::{flux_harmonics, Branch, NSchedule, SidebandGrid};
use crate::spectrum::{measure_peak, transform, Spectrum, Window};

/// The canonical fixture file, embedded verbatim.
pub const CANONICAL_FIXTURES: &str = include_str!("../fixtures/harmonic_tables.csv");

/// Search half-width used when reading feature amplitudes, in bins.
pub const FEATURE_HALF_WIDTH_BINS: usize = 2;

// ─── Fixture tables ─────────────────────────────────────────────────────────

/// The two inter-turn test cases of the source tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixtureCase {
    TenTurns,
    ThirtyTurns,
}

impl FixtureCase {
    pub fn as_str(self) -> &'static str {
        match self {
            FixtureCase::TenTurns => "ten_turns",
            FixtureCase::ThirtyTurns => "thirty_turns",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ten_turns" => Ok(FixtureCase::TenTurns),
            "thirty_turns" => Ok(FixtureCase::ThirtyTurns),
            other => Err(Error::Validation(format!("unknown fixture case `{other}`"))),
        }
    }

    /// Fault label a synthesized waveform of this case carries.
    pub fn fault_label(self) -> FaultLabel {
        match self {
            FixtureCase::TenTurns => FaultLabel::InterTurnMinor,
            FixtureCase::ThirtyTurns => FaultLabel::InterTurnSevere,
        }
    }

    /// The n-schedule under which this case's rows reconcile with the
    /// flux-harmonic equation.
    pub fn reconciling_schedule(self) -> NSchedule {
        match self {
            FixtureCase::TenTurns => NSchedule::FixedOne,
            FixtureCase::ThirtyTurns => NSchedule::HalfKPlusOne,
        }
    }
}

impl std::fmt::Display for FixtureCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-case motor metadata printed alongside the tables.
///
/// `slip` is the value that reconciles the row frequencies, which for one
/// table is not the value the adjacent case text claims; see the source
/// notes in the fixture file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureMeta {
    pub supply_freq_hz: f64,
    pub rotor_speed_rpm: f64,
    pub slip: f64,
    pub rated_kw: f64,
    pub pole_pairs: u32,
}

/// One printed table row: harmonic order with both branch frequencies and
/// amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureRow {
    pub k: u32,
    pub pos_freq_hz: f64,
    pub pos_amp: f64,
    pub neg_freq_hz: f64,
    pub neg_amp: f64,
}

/// One harmonic table: metadata, rows, and the provenance note recording how
/// the printed case labels line up with the stored slip.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureTable {
    case_id: FixtureCase,
    meta: FixtureMeta,
    source_note: String,
    rows: Vec<FixtureRow>,
}

impl FixtureTable {
    pub fn case_id(&self) -> FixtureCase {
        self.case_id
    }

    pub fn meta(&self) -> &FixtureMeta {
        &self.meta
    }

    pub fn source_note(&self) -> &str {
        &self.source_note
    }

    pub fn rows(&self) -> &[FixtureRow] {
        &self.rows
    }

    pub fn row(&self, k: u32) -> Option<&FixtureRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    /// Largest frequency printed in this table.
    pub fn max_freq_hz(&self) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |m, r| m.max(r.pos_freq_hz).max(r.neg_freq_hz))
    }
}

fn parse_num<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from `{field}`"),
    })
}

/// Parse fixture tables from the CSV text format.
///
/// Expected lines: `# meta <case> <f_hz> <rpm> <slip> <kw> <p>` declares a
/// case, `# source <case>: <note>` attaches its provenance note, other `#`
/// lines are ignored, and data rows are
/// `case_id,k,pos_freq_hz,pos_amp,neg_freq_hz,neg_amp`.
pub fn load_fixtures(text: &str) -> Result<Vec<FixtureTable>> {
    let mut tables: Vec<FixtureTable> = Vec::new();
    let mut saw_rows = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# meta ") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("meta line needs 6 fields, got {}", fields.len()),
                });
            }
            let case_id = FixtureCase::parse(fields[0]).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            if tables.iter().any(|t| t.case_id == case_id) {
                return Err(Error::Validation(format!(
                    "duplicate meta for case `{case_id}`"
                )));
            }
            tables.push(FixtureTable {
                case_id,
                meta: FixtureMeta {
                    supply_freq_hz: parse_num(fields[1], line_no, "supply frequency")?,
                    rotor_speed_rpm: parse_num(fields[2], line_no, "rotor speed")?,
                    slip: parse_num(fields[3], line_no, "slip")?,
                    rated_kw: parse_num(fields[4], line_no, "rating")?,
                    pole_pairs: parse_num(fields[5], line_no, "pole pairs")?,
                },
                source_note: String::new(),
                rows: Vec::new(),
            });
            continue;
        }
        if let Some(rest) = line.strip_prefix("# source ") {
            let (case_str, note) = rest.split_once(": ").ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "source line needs `<case>: <note>`".into(),
            })?;
            let case_id = FixtureCase::parse(case_str).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            let table = tables
                .iter_mut()
                .find(|t| t.case_id == case_id)
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: format!("source note for undeclared case `{case_id}`"),
                })?;
            table.source_note = note.to_string();
            continue;
        }
        if line.starts_with('#') || line == "case_id,k,pos_freq_hz,pos_amp,neg_freq_hz,neg_amp" {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("row needs 6 comma-separated fields, got {}", fields.len()),
            });
        }
        let case_id = FixtureCase::parse(fields[0]).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let row = FixtureRow {
            k: parse_num(fields[1], line_no, "harmonic order k")?,
            pos_freq_hz: parse_num(fields[2], line_no, "positive frequency")?,
            pos_amp: parse_num(fields[3], line_no, "positive amplitude")?,
            neg_freq_hz: parse_num(fields[4], line_no, "negative frequency")?,
            neg_amp: parse_num(fields[5], line_no, "negative amplitude")?,
        };
        if row.k.is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "row k = {} is even; tables are keyed by odd k",
                row.k
            )));
        }
        if row.pos_amp < 0.0 || row.neg_amp < 0.0 || row.pos_freq_hz < 0.0 || row.neg_freq_hz < 0.0
        {
            return Err(Error::Validation(format!(
                "row k = {} has a negative frequency or amplitude",
                row.k
            )));
        }
        let table = tables
            .iter_mut()
            .find(|t| t.case_id == case_id)
            .ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("row for undeclared case `{case_id}` (missing `# meta` line)"),
            })?;
        if table.rows.iter().any(|r| r.k == row.k) {
            return Err(Error::Validation(format!(
                "duplicate k = {} in case `{case_id}`",
                row.k
            )));
        }
        table.rows.push(row);
        saw_rows = true;
    }
    if tables.is_empty() || !saw_rows {
        return Err(Error::Parse {
            line: 0,
            msg: "fixture file contains no tables".into(),
        });
    }
    Ok(tables)
}

/// Serialize fixture tables back to the canonical text format.
///
/// Loading the canonical file and serializing the result reproduces the file
/// byte for byte.
pub fn serialize_fixtures(tables: &[FixtureTable]) -> String {
    let mut out = String::from("# MCSA inter-turn fault harmonic tables\n");
    for t in tables {
        out.push_str(&format!(
            "# meta {} {} {} {} {} {}\n",
            t.case_id,
            t.meta.supply_freq_hz,
            t.meta.rotor_speed_rpm,
            t.meta.slip,
            t.meta.rated_kw,
            t.meta.pole_pairs
        ));
    }
    for t in tables {
        if !t.source_note.is_empty() {
            out.push_str(&format!("# source {}: {}\n", t.case_id, t.source_note));
        }
    }
    out.push_str("case_id,k,pos_freq_hz,pos_amp,neg_freq_hz,neg_amp\n");
    for t in tables {
        for r in &t.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                t.case_id, r.k, r.pos_freq_hz, r.pos_amp, r.neg_freq_hz, r.neg_amp
            ));
        }
    }
    out
}

/// The embedded tables, parsed.
pub fn builtin_fixtures() -> Vec<FixtureTable> {
    load_fixtures(CANONICAL_FIXTURES).expect("embedded fixture file is valid")
}

/// Convenience lookup in a fixture list.
pub fn find_case(tables: &[FixtureTable], case_id: FixtureCase) -> Result<&FixtureTable> {
    tables
        .iter()
        .find(|t| t.case_id == case_id)
        .ok_or_else(|| Error::NotFound(format!("fixture case `{case_id}` not loaded")))
}

// ─── Feature vectors ────────────────────────────────────────────────────────

/// Amplitude normalization for extracted features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalize {
    None,
    /// Divide every feature by the measured fundamental amplitude, making
    /// the vector dimensionless and invariant under waveform scaling.
    ByFundamental,
}

impl Normalize {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalize::None => "none",
            Normalize::ByFundamental => "by_fundamental",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalize::None),
            "by_fundamental" | "fundamental" => Ok(Normalize::ByFundamental),
            other => Err(Error::Validation(format!("unknown normalization `{other}`"))),
        }
    }
}

/// Fixed-length vector of sideband amplitudes plus its (k, branch) layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    layout: Vec<(u32, Branch)>,
    label: Option<FaultLabel>,
}

impl FeatureVector {
    pub fn new(
        values: Vec<f64>,
        layout: Vec<(u32, Branch)>,
        label: Option<FaultLabel>,
    ) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::Validation(format!(
                "feature vector has {} values but {} layout entries",
                values.len(),
                layout.len()
            )));
        }
        Ok(Self {
            values,
            layout,
            label,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout(&self) -> &[(u32, Branch)] {
        &self.layout
    }

    pub fn label(&self) -> Option<FaultLabel> {
        self.label
    }

    /// The same vector with its label replaced.
    pub fn with_label(mut self, label: Option<FaultLabel>) -> Self {
        self.label = label;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Layout token list, e.g. `k1_pos,k1_neg,...`.
    pub fn layout_string(&self) -> String {
        layout_string(&self.layout)
    }
}

/// Render a layout as comma-separated `k<k>_<branch>` tokens.
pub fn layout_string(layout: &[(u32, Branch)]) -> String {
    layout
        .iter()
        .map(|(k, b)| format!("k{k}_{b}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Parse a layout token list produced by [`layout_string`].
pub fn parse_layout(s: &str) -> Result<Vec<(u32, Branch)>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let rest = tok
                .strip_prefix('k')
                .ok_or_else(|| Error::Validation(format!("bad layout token `{tok}`")))?;
            let (k_str, branch_str) = rest
                .split_once('_')
                .ok_or_else(|| Error::Validation(format!("bad layout token `{tok}`")))?;
            let k: u32 = k_str
                .parse()
                .map_err(|_| Error::Validation(format!("bad layout token `{tok}`")))?;
            Ok((k, Branch::parse(branch_str)?))
        })
        .collect()
}

/// Read a feature vector off a spectrum at a grid's frequencies.
///
/// `values[i]` is the measured peak amplitude at `grid.entries()[i]`'s
/// frequency (half-width [`FEATURE_HALF_WIDTH_BINS`]); the layout mirrors
/// the grid order.
pub fn extract_features(
    s: &Spectrum,
    grid: &SidebandGrid,
    normalize: Normalize,
) -> Result<FeatureVector> {
    let nyquist = s.nyquist_hz();
    for e in grid.entries() {
        if e.freq_hz >= nyquist {
            return Err(Error::Domain(format!(
                "grid frequency {} Hz (k={}, {}) is not below the spectrum Nyquist {} Hz",
                e.freq_hz, e.k, e.branch, nyquist
            )));
        }
    }
    let mut values = Vec::with_capacity(grid.entries().len());
    for e in grid.entries() {
        values.push(measure_peak(s, e.freq_hz, FEATURE_HALF_WIDTH_BINS)?.amplitude);
    }
    if normalize == Normalize::ByFundamental {
        let fundamental =
            measure_peak(s, grid.supply_freq_hz, FEATURE_HALF_WIDTH_BINS)?.amplitude;
        if fundamental <= 0.0 {
            return Err(Error::Domain(
                "cannot normalize: measured fundamental amplitude is zero".into(),
            ));
        }
        for v in &mut values {
            *v /= fundamental;
        }
    }
    let layout = grid.entries().iter().map(|e| (e.k, e.branch)).collect();
    FeatureVector::new(values, layout, None)
}

// ─── Dataset generation ─────────────────────────────────────────────────────

/// Synthesis and extraction settings for dataset generation.
#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub fundamental_amp: f64,
    /// Harmonic orders in the feature layout; both branches of each k.
    pub k_values: Vec<u32>,
    pub window: Window,
    pub normalize: Normalize,
}

impl Default for DatasetConfig {
    /// The lab grid at tenfold record length (finer bins), low-order
    /// sidebands k = 1..9 on both branches: 10 features.
    fn default() -> Self {
        Self {
            sample_rate_hz: 3250.0,
            n_samples: 3900,
            fundamental_amp: 1.0,
            k_values: vec![1, 3, 5, 7, 9],
            window: Window::Hann,
            normalize: Normalize::ByFundamental,
        }
    }
}

/// n-schedule used when predicting extraction frequencies for a label.
pub fn schedule_for_label(label: FaultLabel) -> NSchedule {
    match label {
        FaultLabel::InterTurnSevere => NSchedule::HalfKPlusOne,
        _ => NSchedule::FixedOne,
    }
}

/// splitmix64 mix; the documented per-sample seed derivation.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sample `index` of a run seeded with `master`.
///
/// Independent per index, so cases may be generated in parallel without
/// changing results.
pub fn derived_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Generate `per_case` labeled feature vectors for every (fault, slip) case
/// via synthesize, transform, and extract.
///
/// Per-sample noise seeds derive deterministically from `seed`, so identical
/// inputs reproduce the dataset exactly.
pub fn build_dataset(
    params: &MotorParams,
    cases: &[(FaultSignature, SlipState)],
    per_case: usize,
    noise_sigma: f64,
    seed: u64,
    cfg: &DatasetConfig,
) -> Result<Vec<FeatureVector>> {
    if per_case == 0 {
        return Err(Error::Domain("per_case must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(cases.len() * per_case);
    for (case_idx, (fault, slip)) in cases.iter().enumerate() {
        let grid = flux_harmonics(
            slip.slip(),
            params.pole_pairs(),
            params.supply_freq_hz(),
            &cfg.k_values,
            schedule_for_label(fault.label()),
        )?;
        for sample_idx in 0..per_case {
            let global = (case_idx * per_case + sample_idx) as u64;
            let w = synthesize(
                params,
                slip,
                fault,
                cfg.fundamental_amp,
                cfg.sample_rate_hz,
                cfg.n_samples,
                noise_sigma,
                derived_seed(seed, global),
            )?;
            let spectrum = transform(&w, cfg.window, None)?;
            let mut fv = extract_features(&spectrum, &grid, cfg.normalize)?;
            fv.label = Some(fault.label());
            out.push(fv);
        }
    }
    Ok(out)
}
