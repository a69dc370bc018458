//! Predicted fault-harmonic frequency grids.
//!
//! Two families of predictions are provided: the flux-harmonic series
//! `(k ± n(1-s)/p) f` used for inter-turn faults, and the broken-rotor-bar
//! pair `f1 (1 ± 2s)`. A grid can be scored against a harmonic fixture table
//! row by row, which is how the stored tables were reconciled (and how their
//! two presumed typos were found).

use crate::error::{Error, Result};
use crate::features::FixtureTable;

/// Default harmonic orders k = 1, 3, ..., 21, matching the tables' k column.
pub fn default_k_values() -> Vec<u32> {
    (1..=21).step_by(2).collect()
}

/// Sideband branch: `positive` adds the rotor term, `negative` subtracts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Positive => "pos",
            Branch::Negative => "neg",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pos" => Ok(Branch::Positive),
            "neg" => Ok(Branch::Negative),
            other => Err(Error::Validation(format!("unknown branch `{other}`"))),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rule assigning the rotor-harmonic index n to each (k, branch) pair.
///
/// The two source tables are internally consistent only under different
/// rules: the ten-turn table matches n = 1 throughout, while the thirty-turn
/// table's negative column matches n = (k+1)/2. Both are first-class options
/// and neither is silently preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NSchedule {
    /// n = 1 on both branches.
    FixedOne,
    /// n = 1 on the positive branch, n = (k+1)/2 on the negative (k odd).
    HalfKPlusOne,
}

impl NSchedule {
    pub fn as_str(self) -> &'static str {
        match self {
            NSchedule::FixedOne => "n1",
            NSchedule::HalfKPlusOne => "half",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "n1" | "fixed_one" => Ok(NSchedule::FixedOne),
            "half" | "half_k_plus_one" => Ok(NSchedule::HalfKPlusOne),
            other => Err(Error::Validation(format!("unknown n-schedule `{other}`"))),
        }
    }
}

/// One predicted grid entry.
///
/// A computed frequency that came out negative is stored as its absolute
/// value with `reflected` set: a real spectrum folds negative frequencies,
/// and the flag preserves provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEntry {
    pub k: u32,
    pub n: u32,
    pub branch: Branch,
    pub freq_hz: f64,
    pub amplitude: Option<f64>,
    pub reflected: bool,
}

/// Predicted (k, branch, frequency) grid, optionally carrying measured or
/// fixture amplitudes. Entries are sorted by (k, branch) with the positive
/// branch first; this order doubles as the feature-vector layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandGrid {
    pub case_label: String,
    pub slip: f64,
    pub pole_pairs: u32,
    pub supply_freq_hz: f64,
    entries: Vec<GridEntry>,
}

impl SidebandGrid {
    pub fn entries(&self) -> &[GridEntry] {
        &self.entries
    }

    /// Look up the entry for a (k, branch) pair.
    pub fn entry(&self, k: u32, branch: Branch) -> Option<&GridEntry> {
        self.entries
            .iter()
            .find(|e| e.k == k && e.branch == branch)
    }

    /// Largest predicted frequency in the grid.
    pub fn max_freq_hz(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.freq_hz))
    }

    /// Build a grid whose frequencies and amplitudes are taken verbatim from
    /// a fixture table instead of being predicted.
    ///
    /// `schedule` assigns the n column only (for reporting); frequencies come
    /// from the table rows. Requested k values missing from the table are a
    /// coverage error.
    pub fn from_fixture(
        table: &FixtureTable,
        k_values: &[u32],
        schedule: NSchedule,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(2 * k_values.len());
        let mut missing = Vec::new();
        for &k in k_values {
            let Some(row) = table.rows().iter().find(|r| r.k == k) else {
                missing.push(k);
                continue;
            };
            let n_neg = match schedule {
                NSchedule::FixedOne => 1,
                NSchedule::HalfKPlusOne => k.div_ceil(2),
            };
            entries.push(GridEntry {
                k,
                n: 1,
                branch: Branch::Positive,
                freq_hz: row.pos_freq_hz,
                amplitude: Some(row.pos_amp),
                reflected: false,
            });
            entries.push(GridEntry {
                k,
                n: n_neg,
                branch: Branch::Negative,
                freq_hz: row.neg_freq_hz,
                amplitude: Some(row.neg_amp),
                reflected: false,
            });
        }
        if !missing.is_empty() {
            return Err(Error::Coverage(format!(
                "fixture `{}` has no rows for k = {missing:?}",
                table.case_id()
            )));
        }
        let mut grid = SidebandGrid {
            case_label: table.case_id().to_string(),
            slip: table.meta().slip,
            pole_pairs: table.meta().pole_pairs,
            supply_freq_hz: table.meta().supply_freq_hz,
            entries,
        };
        grid.sort_and_check()?;
        Ok(grid)
    }

    fn sort_and_check(&mut self) -> Result<()> {
        self.entries.sort_by(|a, b| {
            a.k.cmp(&b.k).then(a.branch.cmp(&b.branch))
        });
        for pair in self.entries.windows(2) {
            if pair[0].k == pair[1].k
                && pair[0].branch == pair[1].branch
                && pair[0].n == pair[1].n
            {
                return Err(Error::Validation(format!(
                    "duplicate grid entry (k={}, n={}, {})",
                    pair[0].k, pair[0].n, pair[0].branch
                )));
            }
        }
        Ok(())
    }
}

// ─── Predictors ─────────────────────────────────────────────────────────────

/// Flux-harmonic frequency grid: `(k ± n(1-s)/p) f`.
///
/// The positive branch always uses n = 1; the negative branch uses the
/// selected schedule. Frequencies are kept at full precision.
pub fn flux_harmonics(
    slip: f64,
    pole_pairs: u32,
    supply_freq_hz: f64,
    k_values: &[u32],
    n_schedule: NSchedule,
) -> Result<SidebandGrid> {
    if !(0.0..1.0).contains(&slip) || !slip.is_finite() {
        return Err(Error::Domain(format!("slip {slip} outside [0, 1)")));
    }
    if pole_pairs < 1 {
        return Err(Error::Domain("pole pairs must be >= 1".into()));
    }
    if !supply_freq_hz.is_finite() || supply_freq_hz <= 0.0 {
        return Err(Error::Domain("supply frequency must be positive".into()));
    }
    if k_values.is_empty() {
        return Err(Error::Domain("k_values must be non-empty".into()));
    }
    let rotor_term_per_n = (1.0 - slip) / pole_pairs as f64;
    let mut entries = Vec::with_capacity(2 * k_values.len());
    for &k in k_values {
        if k == 0 {
            return Err(Error::Domain("harmonic order k must be >= 1".into()));
        }
        let n_neg = match n_schedule {
            NSchedule::FixedOne => 1,
            NSchedule::HalfKPlusOne => {
                if k.is_multiple_of(2) {
                    return Err(Error::Schedule(format!(
                        "half_k_plus_one requires odd k, got k = {k}"
                    )));
                }
                k.div_ceil(2)
            }
        };
        let pos = (k as f64 + rotor_term_per_n) * supply_freq_hz;
        let neg_raw = (k as f64 - n_neg as f64 * rotor_term_per_n) * supply_freq_hz;
        entries.push(GridEntry {
            k,
            n: 1,
            branch: Branch::Positive,
            freq_hz: pos,
            amplitude: None,
            reflected: false,
        });
        entries.push(GridEntry {
            k,
            n: n_neg,
            branch: Branch::Negative,
            freq_hz: neg_raw.abs(),
            amplitude: None,
            reflected: neg_raw < 0.0,
        });
    }
    let mut grid = SidebandGrid {
        case_label: format!("flux_{}", n_schedule.as_str()),
        slip,
        pole_pairs,
        supply_freq_hz,
        entries,
    };
    grid.sort_and_check()?;
    Ok(grid)
}

/// Broken-rotor-bar sidebands `f1 (1 ± 2 m s)` for each requested order m.
///
/// Order 1 reproduces the textbook pair exactly. The entry's k field holds
/// the order; higher orders whose lower sideband goes negative are reflected.
pub fn broken_bar_sidebands(
    slip: f64,
    supply_freq_hz: f64,
    orders: &[u32],
) -> Result<SidebandGrid> {
    if !(0.0..0.5).contains(&slip) || !slip.is_finite() {
        return Err(Error::Domain(format!(
            "slip {slip} outside [0, 0.5): lower sideband would not stay positive"
        )));
    }
    if !supply_freq_hz.is_finite() || supply_freq_hz <= 0.0 {
        return Err(Error::Domain("supply frequency must be positive".into()));
    }
    if orders.is_empty() {
        return Err(Error::Domain("orders must be non-empty".into()));
    }
    let mut entries = Vec::with_capacity(2 * orders.len());
    for &m in orders {
        if m == 0 {
            return Err(Error::Domain("sideband order must be >= 1".into()));
        }
        let offset = 2.0 * m as f64 * slip;
        let lower_raw = supply_freq_hz * (1.0 - offset);
        entries.push(GridEntry {
            k: m,
            n: 1,
            branch: Branch::Positive,
            freq_hz: supply_freq_hz * (1.0 + offset),
            amplitude: None,
            reflected: false,
        });
        entries.push(GridEntry {
            k: m,
            n: 1,
            branch: Branch::Negative,
            freq_hz: lower_raw.abs(),
            amplitude: None,
            reflected: lower_raw < 0.0,
        });
    }
    let mut grid = SidebandGrid {
        case_label: "broken_bar".into(),
        slip,
        pole_pairs: 1,
        supply_freq_hz,
        entries,
    };
    grid.sort_and_check()?;
    Ok(grid)
}

// ─── Fixture matching ───────────────────────────────────────────────────────

/// One scored row of a grid-vs-fixture comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRow {
    pub k: u32,
    pub branch: Branch,
    pub n: u32,
    pub predicted_hz: f64,
    pub fixture_hz: f64,
    pub abs_delta_hz: f64,
    pub pass: bool,
}

/// Per-row comparison of predicted frequencies against a fixture table.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub case_label: String,
    pub tol_hz: f64,
    rows: Vec<MatchRow>,
}

impl MatchReport {
    pub fn rows(&self) -> &[MatchRow] {
        &self.rows
    }

    pub fn pass_count(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn total(&self) -> usize {
        self.rows.len()
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// The (k, branch) pairs that missed the tolerance.
    pub fn failures(&self) -> Vec<(u32, Branch)> {
        self.rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| (r.k, r.branch))
            .collect()
    }
}

/// Score a predicted grid against a fixture table at a frequency tolerance.
///
/// Every fixture row must be covered by the grid; grid entries for k values
/// the fixture does not print are ignored.
pub fn match_table(grid: &SidebandGrid, fixture: &FixtureTable, tol_hz: f64) -> Result<MatchReport> {
    if !tol_hz.is_finite() || tol_hz <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if fixture.rows().is_empty() {
        return Err(Error::Coverage(format!(
            "fixture `{}` has no rows to match",
            fixture.case_id()
        )));
    }
    let mut missing = Vec::new();
    let mut rows = Vec::with_capacity(2 * fixture.rows().len());
    for fixture_row in fixture.rows() {
        let k = fixture_row.k;
        let (Some(pos), Some(neg)) = (
            grid.entry(k, Branch::Positive),
            grid.entry(k, Branch::Negative),
        ) else {
            missing.push(k);
            continue;
        };
        for (entry, fixture_hz) in [
            (pos, fixture_row.pos_freq_hz),
            (neg, fixture_row.neg_freq_hz),
        ] {
            let abs_delta_hz = (entry.freq_hz - fixture_hz).abs();
            rows.push(MatchRow {
                k,
                branch: entry.branch,
                n: entry.n,
                predicted_hz: entry.freq_hz,
                fixture_hz,
                abs_delta_hz,
                pass: abs_delta_hz <= tol_hz,
            });
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage(format!(
            "grid does not cover fixture k values {missing:?}"
        )));
    }
    Ok(MatchReport {
        case_label: fixture.case_id().to_string(),
        tol_hz,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{builtin_fixtures, FixtureCase};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn k1_sidebands_at_one_sixth_slip() {
        let grid = flux_harmonics(1.0 / 6.0, 1, 50.0, &[1], NSchedule::FixedOne).unwrap();
        let pos = grid.entry(1, Branch::Positive).unwrap();
        let neg = grid.entry(1, Branch::Negative).unwrap();
        assert!(close(pos.freq_hz, 275.0 / 3.0), "pos {}", pos.freq_hz); // 91.667
        assert!(close(neg.freq_hz, 25.0 / 3.0), "neg {}", neg.freq_hz); // 8.333
    }

    #[test]
    fn zero_slip_collapses_to_k_plus_minus_one() {
        let ks = default_k_values();
        let grid = flux_harmonics(0.0, 1, 50.0, &ks, NSchedule::FixedOne).unwrap();
        for &k in &ks {
            let pos = grid.entry(k, Branch::Positive).unwrap().freq_hz;
            let neg = grid.entry(k, Branch::Negative).unwrap().freq_hz;
            assert!(close(pos, (k as f64 + 1.0) * 50.0));
            assert!(close(neg, (k as f64 - 1.0) * 50.0));
        }
    }

    #[test]
    fn half_schedule_k5_negative_uses_n3() {
        let grid = flux_harmonics(1.0 / 6.0, 1, 50.0, &[5], NSchedule::HalfKPlusOne).unwrap();
        let neg = grid.entry(5, Branch::Negative).unwrap();
        assert_eq!(neg.n, 3);
        assert!(close(neg.freq_hz, 125.0), "got {}", neg.freq_hz);
    }

    #[test]
    fn fixed_one_k3_negative_at_printed_slip() {
        let grid = flux_harmonics(0.133, 1, 50.0, &[3], NSchedule::FixedOne).unwrap();
        let neg = grid.entry(3, Branch::Negative).unwrap();
        assert!(close(neg.freq_hz, 106.65), "got {}", neg.freq_hz);
    }

    #[test]
    fn half_schedule_rejects_even_k() {
        assert!(matches!(
            flux_harmonics(0.1, 1, 50.0, &[2], NSchedule::HalfKPlusOne),
            Err(Error::Schedule(_))
        ));
    }

    #[test]
    fn slip_out_of_range_rejected() {
        assert!(matches!(
            flux_harmonics(1.0, 1, 50.0, &[1], NSchedule::FixedOne),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            flux_harmonics(-0.1, 1, 50.0, &[1], NSchedule::FixedOne),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn branches_are_symmetric_about_k_f_under_fixed_one() {
        for slip in [0.0, 0.05, 1.0 / 6.0, 0.133, 0.4] {
            let grid = flux_harmonics(slip, 1, 50.0, &default_k_values(), NSchedule::FixedOne)
                .unwrap();
            for &k in &default_k_values() {
                let pos = grid.entry(k, Branch::Positive).unwrap().freq_hz;
                let neg = grid.entry(k, Branch::Negative).unwrap();
                let signed_neg = if neg.reflected { -neg.freq_hz } else { neg.freq_hz };
                assert!(
                    close(pos + signed_neg, 2.0 * k as f64 * 50.0),
                    "asymmetry at k={k}, slip={slip}"
                );
            }
        }
    }

    #[test]
    fn frequencies_increase_with_k_within_branch() {
        let grid =
            flux_harmonics(0.2, 1, 50.0, &default_k_values(), NSchedule::FixedOne).unwrap();
        for branch in [Branch::Positive, Branch::Negative] {
            let freqs: Vec<f64> = grid
                .entries()
                .iter()
                .filter(|e| e.branch == branch)
                .map(|e| e.freq_hz)
                .collect();
            assert!(freqs.windows(2).all(|w| w[0] < w[1]), "{branch} not increasing");
        }
    }

    #[test]
    fn reflection_flag_set_for_negative_frequency() {
        // k=1, n=2, p=1, s=0: negative branch = (1 - 2) * 50 = -50.
        let grid = flux_harmonics(0.0, 1, 50.0, &[1], NSchedule::HalfKPlusOne).unwrap();
        // n = (1+1)/2 = 1 here, so no reflection; use a slip making it negative.
        assert!(!grid.entry(1, Branch::Negative).unwrap().reflected);
        let grid = flux_harmonics(0.0, 1, 50.0, &[3], NSchedule::HalfKPlusOne).unwrap();
        // k=3 negative: n=2, (3 - 2) * 50 = 50, still positive.
        assert!(!grid.entry(3, Branch::Negative).unwrap().reflected);
        // Force a reflected entry via broken-bar at high order.
        let bb = broken_bar_sidebands(0.3, 50.0, &[2]).unwrap();
        let lower = bb.entry(2, Branch::Negative).unwrap();
        assert!(lower.reflected);
        assert!(close(lower.freq_hz, 10.0)); // |50 (1 - 1.2)|
    }

    #[test]
    fn broken_bar_textbook_pair() {
        let grid = broken_bar_sidebands(0.05, 50.0, &[1]).unwrap();
        assert!(close(grid.entry(1, Branch::Positive).unwrap().freq_hz, 55.0));
        assert!(close(grid.entry(1, Branch::Negative).unwrap().freq_hz, 45.0));
    }

    #[test]
    fn broken_bar_zero_slip_degenerates_to_fundamental() {
        let grid = broken_bar_sidebands(0.0, 50.0, &[1]).unwrap();
        assert_eq!(grid.entry(1, Branch::Positive).unwrap().freq_hz, 50.0);
        assert_eq!(grid.entry(1, Branch::Negative).unwrap().freq_hz, 50.0);
    }

    #[test]
    fn broken_bar_two_orders() {
        let grid = broken_bar_sidebands(1.0 / 6.0, 50.0, &[1, 2]).unwrap();
        let freqs: Vec<f64> = grid.entries().iter().map(|e| e.freq_hz).collect();
        for expect in [200.0 / 3.0, 100.0 / 3.0, 250.0 / 3.0, 50.0 / 3.0] {
            assert!(
                freqs.iter().any(|&f| close(f, expect)),
                "missing {expect} in {freqs:?}"
            );
        }
    }

    #[test]
    fn broken_bar_sidebands_average_to_fundamental() {
        for slip in [0.0, 0.01, 0.1, 0.2, 0.45] {
            let grid = broken_bar_sidebands(slip, 50.0, &[1, 2, 3]).unwrap();
            for m in [1, 2, 3] {
                let up = grid.entry(m, Branch::Positive).unwrap().freq_hz;
                let lo = grid.entry(m, Branch::Negative).unwrap();
                let signed = if lo.reflected { -lo.freq_hz } else { lo.freq_hz };
                assert!(close((up + signed) / 2.0, 50.0), "m={m} slip={slip}");
            }
        }
    }

    #[test]
    fn broken_bar_rejects_half_slip() {
        assert!(matches!(
            broken_bar_sidebands(0.5, 50.0, &[1]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn thirty_turn_match_finds_the_two_typo_rows() {
        let fixtures = builtin_fixtures();
        let fixture = fixtures
            .iter()
            .find(|t| t.case_id() == FixtureCase::ThirtyTurns)
            .unwrap();
        let grid = flux_harmonics(
            1.0 / 6.0,
            1,
            50.0,
            &default_k_values(),
            NSchedule::HalfKPlusOne,
        )
        .unwrap();
        let report = match_table(&grid, fixture, 1.0).unwrap();
        assert_eq!(report.total(), 22);
        assert_eq!(report.pass_count(), 20);
        let mut failures = report.failures();
        failures.sort();
        assert_eq!(
            failures,
            vec![(3, Branch::Positive), (13, Branch::Negative)]
        );
    }

    #[test]
    fn ten_turn_match_passes_every_row() {
        let fixtures = builtin_fixtures();
        let fixture = fixtures
            .iter()
            .find(|t| t.case_id() == FixtureCase::TenTurns)
            .unwrap();
        let ks: Vec<u32> = (1..=19).step_by(2).collect();
        let grid = flux_harmonics(0.133, 1, 50.0, &ks, NSchedule::FixedOne).unwrap();
        let report = match_table(&grid, fixture, 1.0).unwrap();
        assert_eq!(report.total(), 20);
        assert_eq!(report.pass_count(), 20);
        assert!(report.all_pass());
    }

    #[test]
    fn match_with_uncovered_fixture_k_is_coverage_error() {
        let fixtures = builtin_fixtures();
        let fixture = fixtures
            .iter()
            .find(|t| t.case_id() == FixtureCase::ThirtyTurns)
            .unwrap();
        let grid = flux_harmonics(1.0 / 6.0, 1, 50.0, &[1, 3], NSchedule::FixedOne).unwrap();
        match match_table(&grid, fixture, 1.0) {
            Err(Error::Coverage(msg)) => assert!(msg.contains('5'), "missing ks listed: {msg}"),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn match_against_rowless_fixture_is_coverage_error() {
        let text = "# meta thirty_turns 50 2500 0.166 2.2 1\n\
                    # meta ten_turns 50 2650 0.133 2.2 1\n\
                    ten_turns,1,94,0.01288,6,0.323\n";
        let tables = crate::features::load_fixtures(text).unwrap();
        let empty = tables
            .iter()
            .find(|t| t.case_id() == FixtureCase::ThirtyTurns)
            .unwrap();
        let grid = flux_harmonics(0.1, 1, 50.0, &[1], NSchedule::FixedOne).unwrap();
        assert!(matches!(
            match_table(&grid, empty, 1.0),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn grid_from_fixture_carries_table_values() {
        let fixtures = builtin_fixtures();
        let fixture = fixtures
            .iter()
            .find(|t| t.case_id() == FixtureCase::ThirtyTurns)
            .unwrap();
        let grid =
            SidebandGrid::from_fixture(fixture, &[1, 3], NSchedule::HalfKPlusOne).unwrap();
        let pos1 = grid.entry(1, Branch::Positive).unwrap();
        assert_eq!(pos1.freq_hz, 92.0);
        assert_eq!(pos1.amplitude, Some(0.1312));
        let neg3 = grid.entry(3, Branch::Negative).unwrap();
        assert_eq!(neg3.n, 2);
        assert_eq!(neg3.freq_hz, 67.0);
    }
}
