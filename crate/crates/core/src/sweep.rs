//! Synthetic frequency-sweep generation: spectral or time-domain engine,
//! optional seeded gaussian noise, provenance comments for the output CSV.

use crate::config::{NoiseSpec, SimulationConfig};
use crate::core_model::{Drive, Specimen};
use crate::error::{Error, Result};
use crate::fitter::{SweepDataset, V3wPoint};
use crate::lockin;
use crate::spectral::{v3w_phasor_lossy, SeriesControl};
use crate::{csvio, fdm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Analytic series phasor (fast, exact to the chosen n_max).
    Spectral,
    /// Time-domain PDE solve plus digital lock-in.
    Oracle,
}

impl Engine {
    pub fn label(&self) -> &'static str {
        match self {
            Engine::Spectral => "spectral",
            Engine::Oracle => "oracle",
        }
    }
}

/// A generated sweep plus the provenance comments to embed in its CSV.
#[derive(Debug, Clone)]
pub struct GeneratedSweep {
    pub dataset: SweepDataset,
    pub comments: Vec<String>,
}

impl GeneratedSweep {
    pub fn to_csv(&self) -> csvio::CsvSweep {
        csvio::CsvSweep {
            points: self.dataset.points.clone(),
            has_phase: self.dataset.points.iter().all(|p| p.phase.is_some()),
            has_sigma: self.dataset.points.iter().all(|p| p.sigma.is_some()),
        }
    }
}

/// Compute the noiseless sweep with the chosen engine, then overlay seeded
/// gaussian noise. All randomness flows from `noise.seed`; identical inputs
/// give identical output bytes.
pub fn generate_sweep(
    spec: &Specimen,
    i_rms: f64,
    freqs_hz: &[f64],
    sim: &SimulationConfig,
    engine: Engine,
    noise: &NoiseSpec,
) -> Result<GeneratedSweep> {
    spec.validate()?;
    noise.validate()?;
    if freqs_hz.len() < 4 {
        return Err(Error::Input(format!(
            "sweep needs >= 4 frequencies, got {}",
            freqs_hz.len()
        )));
    }
    let g = sim.loss.loss_rate(spec)?;
    let ctl = SeriesControl::new(sim.n_max)?;

    let mut points = Vec::with_capacity(freqs_hz.len());
    for (idx, &f) in freqs_hz.iter().enumerate() {
        let drive = Drive { i_rms, omega: 2.0 * PI * f };
        let phasor = match engine {
            Engine::Spectral => v3w_phasor_lossy(spec, &drive, ctl, g)
                .map_err(|e| at_freq(idx, f, e))?,
            Engine::Oracle => {
                let grid = sim.grid_for(spec, &drive).map_err(|e| at_freq(idx, f, e))?;
                let trace = fdm::solve(spec, &drive, &grid, sim.include_c_term, g)
                    .map_err(|e| at_freq(idx, f, e))?;
                let dem = lockin::demodulate(&trace.times, &trace.voltage, drive.omega, 3)
                    .map_err(|e| at_freq(idx, f, e))?;
                crate::spectral::Phasor3w {
                    amplitude_rms: dem.amplitude_rms,
                    phase: dem.phase,
                }
            }
        };
        points.push(V3wPoint {
            omega: drive.omega,
            amplitude_rms: phasor.amplitude_rms,
            phase: Some(phasor.phase),
            sigma: None,
        });
    }

    apply_noise(&mut points, noise);

    let mut comments = vec![
        format!("engine = {}", engine.label()),
        format!("n_max = {}", sim.n_max),
        format!("loss_g = {g} 1/s"),
        format!("include_c_term = {}", sim.include_c_term),
        format!("i_rms = {i_rms} A"),
    ];
    if noise.amplitude_rel > 0.0 || noise.phase_rad > 0.0 {
        comments.push(format!(
            "noise: amplitude_rel = {}, phase_rad = {}, seed = {}",
            noise.amplitude_rel, noise.phase_rad, noise.seed
        ));
    }

    let dataset = SweepDataset::new(points, spec.clone(), i_rms)?;
    Ok(GeneratedSweep { dataset, comments })
}

fn at_freq(idx: usize, f: f64, e: Error) -> Error {
    match e {
        // keep solver-convergence identity (and its exit code); the message
        // already carries the diagnostics
        Error::Convergence { .. } => e,
        other => Error::Input(format!("frequency {idx} ({f} Hz): {other}")),
    }
}

fn apply_noise(points: &mut [V3wPoint], noise: &NoiseSpec) {
    if noise.amplitude_rel == 0.0 && noise.phase_rad == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    for p in points.iter_mut() {
        // two draws per point in a fixed order, so the stream is stable
        let da: f64 = unit.sample(&mut rng);
        let dp: f64 = unit.sample(&mut rng);
        if noise.amplitude_rel > 0.0 {
            let sigma = noise.amplitude_rel * p.amplitude_rms;
            // clamp: amplitudes are physically positive
            p.amplitude_rms = (p.amplitude_rms + sigma * da).max(1e-3 * sigma);
            p.sigma = Some(sigma);
        }
        if noise.phase_rad > 0.0 {
            if let Some(ph) = p.phase {
                p.phase = Some(crate::spectral::wrap_phase(ph + noise.phase_rad * dp));
            }
        }
    }
}
