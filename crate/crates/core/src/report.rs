//! Human-readable run reports (flat `key = value` text) and plot-ready CSV
//! tables (`x,y_data,y_fit` triplets). No binary formats; everything diffs.

use crate::core_model::Specimen;
use crate::error::{Error, Result};
use crate::fitter::{FitResult, SweepDataset, V3wPoint};
use crate::spectral::{fold_phase, ErrorCurveRow};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Ordered key = value report. Insertion order is preserved so identical
/// runs render byte-identical files.
#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }
}

/// Flat report for one fit: recovered parameters, diagnostics, window.
pub fn fit_report(fit: &FitResult, spec: &Specimen) -> Report {
    let mut r = Report::new();
    r.push("model", fit.model);
    r.push("t0_k", spec.t0);
    r.push("kappa_w_per_m_k", fit.kappa);
    r.push("kappa_se", fit.kappa_se);
    r.push("gamma_s", fit.gamma);
    r.push("gamma_se", fit.gamma_se);
    r.push("cp_j_per_kg_k", fit.cp);
    r.push("residual_rel_rms", fit.residual_norm);
    r.push("n_points_fitted", fit.n_used);
    r.push("window_2wg_min", fit.freq_window.0);
    r.push("window_2wg_max", fit.freq_window.1);
    r.push("iterations", fit.iterations);
    if let Some(c) = fit.condition_10 {
        r.push("condition_10_n1", c);
    }
    if let Some(gg) = fit.g_gamma {
        r.push("g_gamma", gg);
    }
    r
}

/// `freq_hz,v3w_vrms_data,v3w_vrms_fit` for amplitude-vs-frequency plots.
/// `model` maps omega to the fitted amplitude.
pub fn amplitude_plot_csv<F>(points: &[V3wPoint], mut model: F) -> String
where
    F: FnMut(f64) -> f64,
{
    let mut out = String::from("freq_hz,v3w_vrms_data,v3w_vrms_fit\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{}",
            p.omega / (2.0 * PI),
            p.amplitude_rms,
            model(p.omega)
        );
    }
    out
}

/// `two_omega,tan_phi_data,tan_phi_fit` for the phase-slope plot; the fit
/// column is the line 2 omega gamma. Points without phase are skipped.
pub fn phase_plot_csv(data: &SweepDataset, gamma: f64) -> String {
    let mut out = String::from("two_omega,tan_phi_data,tan_phi_fit\n");
    for p in &data.points {
        if let Some(phase) = p.phase {
            let phi = fold_phase(phase, data.specimen.rprime);
            let _ = writeln!(out, "{},{},{}", 2.0 * p.omega, phi.tan(), 2.0 * p.omega * gamma);
        }
    }
    out
}

/// Truncation-error table: `two_omega_gamma,exact,first_term,difference,relative`.
pub fn error_table_csv(rows: &[ErrorCurveRow]) -> String {
    let mut out = String::from("two_omega_gamma,exact,first_term,difference,relative\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.reduced_freq, r.exact, r.first_term, r.difference, r.relative
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{error_curves, SeriesControl};

    #[test]
    fn report_renders_in_insertion_order() {
        let mut r = Report::new();
        r.push("b_key", 2);
        r.push("a_key", 1.5);
        assert_eq!(r.render(), "b_key = 2\na_key = 1.5\n");
    }

    #[test]
    fn amplitude_plot_has_header_and_rows() {
        let points = vec![
            V3wPoint { omega: 2.0 * PI, amplitude_rms: 1e-6, phase: None, sigma: None },
            V3wPoint { omega: 4.0 * PI, amplitude_rms: 5e-7, phase: None, sigma: None },
        ];
        let csv = amplitude_plot_csv(&points, |w| 1e-6 / w);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "freq_hz,v3w_vrms_data,v3w_vrms_fit");
        assert!(lines[1].starts_with("1,"));
    }

    #[test]
    fn error_table_starts_near_odd_zeta_excess() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let rows = error_curves(&grid, SeriesControl::EXACT).unwrap();
        let csv = error_table_csv(&rows);
        let first_row = csv.lines().nth(1).unwrap();
        let diff: f64 = first_row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((diff - 0.01468).abs() < 1e-4);
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut a = Report::new();
        let mut b = Report::new();
        for r in [&mut a, &mut b] {
            r.push("x", 1.0 / 3.0);
            r.push("y", PI);
        }
        assert_eq!(a.render(), b.render());
    }
}
