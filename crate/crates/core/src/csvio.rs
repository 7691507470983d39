//! Sweep CSV ingestion and emission.
//!
//! Format: header `freq_hz,v3w_vrms[,phase_deg][,sigma_vrms]`, one row per
//! frequency, `#` comment lines anywhere, decimal point, UTF-8. Phases are
//! degrees on disk and radians in memory.

use crate::error::{Error, Result};
use crate::fitter::V3wPoint;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// A parsed sweep file: points sorted by frequency, plus which optional
/// columns were present.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSweep {
    pub points: Vec<V3wPoint>,
    pub has_phase: bool,
    pub has_sigma: bool,
}

fn bad_row(line: usize, message: impl Into<String>) -> Error {
    Error::Input(format!("line {line}: {}", message.into()))
}

fn parse_header(header: &str, line: usize) -> Result<(bool, bool)> {
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    match cols.as_slice() {
        ["freq_hz", "v3w_vrms"] => Ok((false, false)),
        ["freq_hz", "v3w_vrms", "phase_deg"] => Ok((true, false)),
        ["freq_hz", "v3w_vrms", "sigma_vrms"] => Ok((false, true)),
        ["freq_hz", "v3w_vrms", "phase_deg", "sigma_vrms"] => Ok((true, true)),
        _ => Err(bad_row(
            line,
            format!("unrecognized header '{header}' (expected freq_hz,v3w_vrms[,phase_deg][,sigma_vrms])"),
        )),
    }
}

pub fn ingest_csv(path: &Path) -> Result<CsvSweep> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<CsvSweep> {
    let mut header: Option<(bool, bool)> = None;
    // (freq, point, source line) so duplicate reports can name the line
    let mut rows: Vec<(f64, V3wPoint, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (has_phase, has_sigma) = match header {
            Some(h) => h,
            None => {
                header = Some(parse_header(content, line)?);
                continue;
            }
        };
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        let expected = 2 + has_phase as usize + has_sigma as usize;
        if fields.len() != expected {
            return Err(bad_row(
                line,
                format!("expected {expected} fields, got {}", fields.len()),
            ));
        }
        let parse = |i: usize, name: &str| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| bad_row(line, format!("cannot parse {name} '{}'", fields[i])))
        };
        let freq = parse(0, "freq_hz")?;
        let amplitude = parse(1, "v3w_vrms")?;
        let mut col = 2;
        let phase = if has_phase {
            let deg = parse(col, "phase_deg")?;
            col += 1;
            Some(deg * PI / 180.0)
        } else {
            None
        };
        let sigma = if has_sigma { Some(parse(col, "sigma_vrms")?) } else { None };
        if !(freq > 0.0) {
            return Err(bad_row(line, format!("freq_hz must be > 0, got {freq}")));
        }
        if !(amplitude > 0.0) {
            return Err(bad_row(line, format!("v3w_vrms must be > 0, got {amplitude}")));
        }
        if let Some(s) = sigma {
            if !(s > 0.0) {
                return Err(bad_row(line, format!("sigma_vrms must be > 0, got {s}")));
            }
        }
        rows.push((
            freq,
            V3wPoint {
                omega: 2.0 * PI * freq,
                amplitude_rms: amplitude,
                phase,
                sigma,
            },
            line,
        ));
    }

    let (has_phase, has_sigma) =
        header.ok_or_else(|| Error::Input("no header row found".into()))?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(bad_row(
                w[1].2,
                format!("duplicate frequency {} Hz (first seen on line {})", w[1].0, w[0].2),
            ));
        }
    }
    Ok(CsvSweep {
        points: rows.into_iter().map(|(_, p, _)| p).collect(),
        has_phase,
        has_sigma,
    })
}

/// Render a sweep back to CSV text. `comments` become leading `#` lines.
/// Numbers use shortest round-trip formatting, so emit -> ingest is exact.
pub fn render_csv(sweep: &CsvSweep, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let mut header = String::from("freq_hz,v3w_vrms");
    if sweep.has_phase {
        header.push_str(",phase_deg");
    }
    if sweep.has_sigma {
        header.push_str(",sigma_vrms");
    }
    let _ = writeln!(out, "{header}");
    for p in &sweep.points {
        let _ = write!(out, "{},{}", p.omega / (2.0 * PI), p.amplitude_rms);
        if sweep.has_phase {
            let _ = write!(out, ",{}", p.phase.unwrap_or(0.0) * 180.0 / PI);
        }
        if sweep.has_sigma {
            let _ = write!(out, ",{}", p.sigma.unwrap_or(0.0));
        }
        out.push('\n');
    }
    out
}

pub fn emit_csv(path: &Path, sweep: &CsvSweep, comments: &[String]) -> Result<()> {
    std::fs::write(path, render_csv(sweep, comments))
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}
