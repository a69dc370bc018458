//! Text file formats for waveforms, spectra, feature datasets, match
//! reports, captures, and models.
//!
//! All writers are deterministic — same data, same bytes — so pipelines can
//! be compared file-for-file across runs. Floating-point values are written
//! with 18 significant digits, enough to reproduce every f64 exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::ann::{model_from_text, model_to_text, MlpModel};
use crate::daq::{decode_nibbles, DaqCapture, NibbleRead};
use crate::error::{Error, Result};
use crate::features::{layout_string, parse_layout, FeatureVector};
use crate::motor::{FaultLabel, Waveform};
use crate::sideband::MatchReport;
use crate::spectrum::Spectrum;

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

// ─── Waveform (WFM-CSV) ─────────────────────────────────────────────────────

/// Render a waveform: `# fs_hz=<decimal>` then one sample per line.
pub fn waveform_to_string(w: &Waveform) -> String {
    let mut out = format!("# fs_hz={}\n", w.sample_rate_hz());
    for &s in w.samples() {
        out.push_str(&fmt_f64(s));
        out.push('\n');
    }
    out
}

/// Parse the WFM-CSV format.
pub fn waveform_from_string(text: &str) -> Result<Waveform> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty waveform file".into(),
    })?;
    let fs: f64 = header
        .strip_prefix("# fs_hz=")
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "first line must be `# fs_hz=<decimal>`".into(),
        })?
        .trim()
        .parse()
        .map_err(|_| Error::Parse {
            line: 1,
            msg: "cannot parse sample rate".into(),
        })?;
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        samples.push(line.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("cannot parse sample `{line}`"),
        })?);
    }
    Waveform::new(fs, samples)
}

pub fn write_waveform(path: &Path, w: &Waveform) -> Result<()> {
    fs::write(path, waveform_to_string(w))?;
    Ok(())
}

pub fn read_waveform(path: &Path) -> Result<Waveform> {
    waveform_from_string(&fs::read_to_string(path)?)
}

// ─── Spectrum CSV ───────────────────────────────────────────────────────────

/// Render a spectrum: `# bin_hz=` header, then `bin_index,freq_hz,amplitude`.
pub fn spectrum_to_string(s: &Spectrum) -> String {
    let mut out = format!("# bin_hz={}\n", s.bin_hz());
    out.push_str("bin_index,freq_hz,amplitude\n");
    for (j, &a) in s.amplitudes().iter().enumerate() {
        let _ = writeln!(out, "{j},{},{}", fmt_f64(s.freq_of_bin(j)), fmt_f64(a));
    }
    out
}

pub fn write_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    fs::write(path, spectrum_to_string(s))?;
    Ok(())
}

// ─── Match report CSV ───────────────────────────────────────────────────────

/// Render a match report: `k,branch,n,predicted_hz,fixture_hz,abs_delta_hz,pass`.
pub fn match_report_to_string(r: &MatchReport) -> String {
    let mut out = String::from("k,branch,n,predicted_hz,fixture_hz,abs_delta_hz,pass\n");
    for row in r.rows() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.k,
            row.branch,
            row.n,
            fmt_f64(row.predicted_hz),
            fmt_f64(row.fixture_hz),
            fmt_f64(row.abs_delta_hz),
            row.pass
        );
    }
    out
}

// ─── Feature dataset CSV ────────────────────────────────────────────────────

/// Render labeled feature vectors: `# layout=` header then `label,v1,...,vD`.
///
/// Every vector must share one layout. Unlabeled vectors write `?`.
pub fn dataset_to_string(data: &[FeatureVector]) -> Result<String> {
    let Some(first) = data.first() else {
        return Err(Error::Validation("cannot serialize an empty dataset".into()));
    };
    for v in data {
        if v.layout() != first.layout() {
            return Err(Error::Validation(
                "feature vectors in a dataset must share one layout".into(),
            ));
        }
    }
    let mut out = format!("# layout={}\n", layout_string(first.layout()));
    for v in data {
        let label = v.label().map_or("?", |l| l.as_str());
        out.push_str(label);
        for &x in v.values() {
            out.push(',');
            out.push_str(&fmt_f64(x));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse a feature dataset; `?` labels load as unlabeled vectors.
pub fn dataset_from_string(text: &str) -> Result<Vec<FeatureVector>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty dataset file".into(),
    })?;
    let layout = parse_layout(header.strip_prefix("# layout=").ok_or_else(|| Error::Parse {
        line: 1,
        msg: "first line must be `# layout=<tokens>`".into(),
    })?)?;
    let mut data = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let label_field = fields.next().expect("split yields at least one field");
        let label = match label_field {
            "?" => None,
            other => Some(FaultLabel::parse(other).map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?),
        };
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("cannot parse feature value `{f}`"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != layout.len() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!(
                    "row has {} values but the layout declares {}",
                    values.len(),
                    layout.len()
                ),
            });
        }
        data.push(FeatureVector::new(values, layout.clone(), label)?);
    }
    if data.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "dataset file has no rows".into(),
        });
    }
    Ok(data)
}

pub fn write_dataset(path: &Path, data: &[FeatureVector]) -> Result<()> {
    fs::write(path, dataset_to_string(data)?)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<FeatureVector>> {
    dataset_from_string(&fs::read_to_string(path)?)
}

// ─── Capture file (DAQ-CAP v1) ──────────────────────────────────────────────

/// Render a capture bit-exactly:
/// header lines, then `code_hex,low_s4s6,low_s7,high_s4s6,high_s7` per sample.
pub fn capture_to_string(cap: &DaqCapture) -> String {
    let mut out = String::from("# DAQ-CAP v1\n");
    let _ = writeln!(out, "# channel={}", cap.channel_select);
    let _ = writeln!(out, "# fs_hz={}", cap.sample_rate_hz);
    for (i, &code) in cap.codes.iter().enumerate() {
        let low = &cap.wire_trace[2 * i];
        let high = &cap.wire_trace[2 * i + 1];
        let _ = writeln!(
            out,
            "{code:02x},{},{},{},{}",
            low.s4_s6, low.s7, high.s4_s6, high.s7
        );
    }
    out
}

/// Parse a capture file, cross-checking every row's code against its wire
/// reads; a mismatch (e.g. swapped nibbles) is a protocol error naming the
/// line.
pub fn capture_from_string(text: &str) -> Result<DaqCapture> {
    let mut channel_select: Option<u8> = None;
    let mut fs: Option<f64> = None;
    let mut codes = Vec::new();
    let mut wire_trace = Vec::new();
    let mut saw_magic = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "# DAQ-CAP v1" {
            saw_magic = true;
            continue;
        }
        if let Some(v) = line.strip_prefix("# channel=") {
            channel_select = Some(v.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: "cannot parse channel select".into(),
            })?);
            continue;
        }
        if let Some(v) = line.strip_prefix("# fs_hz=") {
            fs = Some(v.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: "cannot parse sample rate".into(),
            })?);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("capture row needs 5 fields, got {}", fields.len()),
            });
        }
        let code = u8::from_str_radix(fields[0], 16).map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad hex code `{}`", fields[0]),
        })?;
        let bits = |field: &str, max: u8, what: &str| -> Result<u8> {
            let v: u8 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad {what} `{field}`"),
            })?;
            if v > max {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("{what} {v} exceeds {max}"),
                });
            }
            Ok(v)
        };
        let low = NibbleRead {
            select_high: false,
            s4_s6: bits(fields[1], 7, "low s4_s6")?,
            s7: bits(fields[2], 1, "low s7")?,
        };
        let high = NibbleRead {
            select_high: true,
            s4_s6: bits(fields[3], 7, "high s4_s6")?,
            s7: bits(fields[4], 1, "high s7")?,
        };
        let decoded = decode_nibbles(&low, &high)?;
        if decoded != code {
            return Err(Error::Protocol(format!(
                "line {line_no}: wire reads decode to {decoded:#04x} but the row claims {code:#04x} \
                 (nibbles swapped or corrupted)"
            )));
        }
        codes.push(code);
        wire_trace.push(low);
        wire_trace.push(high);
    }
    if !saw_magic {
        return Err(Error::Parse {
            line: 1,
            msg: "missing `# DAQ-CAP v1` header".into(),
        });
    }
    let channel_select = channel_select.ok_or(Error::Parse {
        line: 1,
        msg: "missing `# channel=` header".into(),
    })?;
    let sample_rate_hz = fs.ok_or(Error::Parse {
        line: 1,
        msg: "missing `# fs_hz=` header".into(),
    })?;
    if codes.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "capture file has no samples".into(),
        });
    }
    Ok(DaqCapture {
        channel_select,
        sample_rate_hz,
        codes,
        wire_trace,
        saturation_count: 0,
    })
}

pub fn write_capture(path: &Path, cap: &DaqCapture) -> Result<()> {
    fs::write(path, capture_to_string(cap))?;
    Ok(())
}

pub fn read_capture(path: &Path) -> Result<DaqCapture> {
    capture_from_string(&fs::read_to_string(path)?)
}

// ─── Model file ─────────────────────────────────────────────────────────────

pub fn write_model(path: &Path, m: &MlpModel) -> Result<()> {
    fs::write(path, model_to_text(m))?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<MlpModel> {
    model_from_text(&fs::read_to_string(path)?)
}
