//! TOML run configuration. Dimensioned values accept unit suffixes ("8 mm",
//! "10 mA") or bare numbers in base SI units; unknown keys are rejected.

use crate::core_model::{convection_g, radiation_g, ConditionThresholds, Specimen};
use crate::error::{Error, Result};
use crate::fdm::GridSpec;
use crate::fitter::AmplitudeModel;
use crate::units::{Dimension, Qty};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub specimen: SpecimenConfig,
    pub drive: DriveConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub io: IoConfig,
    pub noise: Option<NoiseSpec>,
    pub pipeline: Option<PipelineConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecimenConfig {
    pub length: Qty,
    /// Either `area` or `diameter` (cylinder) must be given.
    pub area: Option<Qty>,
    pub diameter: Option<Qty>,
    pub density: Qty,
    pub cp: Qty,
    pub kappa: Qty,
    pub resistance: Qty,
    pub rprime: Qty,
    pub t0: Qty,
    pub emissivity: Option<f64>,
    /// Gas-convection surface conductivity (W/m^2 K).
    pub eta: Option<f64>,
}

impl SpecimenConfig {
    pub fn resolve(&self) -> Result<Specimen> {
        let diameter = self
            .diameter
            .as_ref()
            .map(|q| q.in_unit(Dimension::Length))
            .transpose()?;
        let area = match (&self.area, diameter) {
            (Some(q), _) => q.in_unit(Dimension::Area)?,
            (None, Some(d)) => std::f64::consts::PI * d * d / 4.0,
            (None, None) => {
                return Err(Error::Config(
                    "specimen needs either `area` or `diameter`".into(),
                ))
            }
        };
        let spec = Specimen {
            length: self.length.in_unit(Dimension::Length)?,
            area,
            diameter,
            density: self.density.in_unit(Dimension::Density)?,
            cp: self.cp.in_unit(Dimension::SpecificHeat)?,
            kappa: self.kappa.in_unit(Dimension::Conductivity)?,
            resistance: self.resistance.in_unit(Dimension::Resistance)?,
            rprime: self.rprime.in_unit(Dimension::ResistanceSlope)?,
            t0: self.t0.in_unit(Dimension::Temperature)?,
            emissivity: self.emissivity,
            eta: self.eta,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub i_rms: Qty,
    /// Explicit frequency list (Hz unless suffixed)...
    pub frequencies: Option<Vec<Qty>>,
    /// ...or a log-spaced range.
    pub f_min: Option<Qty>,
    pub f_max: Option<Qty>,
    pub n_points: Option<usize>,
}

impl DriveConfig {
    pub fn i_rms(&self) -> Result<f64> {
        let i = self.i_rms.in_unit(Dimension::Current)?;
        if !(i > 0.0) {
            return Err(Error::Config(format!("drive.i_rms must be > 0, got {i}")));
        }
        Ok(i)
    }

    /// Frequencies in Hz, strictly increasing.
    pub fn frequencies_hz(&self) -> Result<Vec<f64>> {
        let freqs = match (&self.frequencies, &self.f_min, &self.f_max, self.n_points) {
            (Some(list), None, None, None) => {
                let mut out = Vec::with_capacity(list.len());
                for q in list {
                    out.push(q.in_unit(Dimension::Frequency)?);
                }
                out
            }
            (None, Some(lo), Some(hi), Some(n)) => {
                let lo = lo.in_unit(Dimension::Frequency)?;
                let hi = hi.in_unit(Dimension::Frequency)?;
                if !(lo > 0.0) || !(hi > lo) || n < 2 {
                    return Err(Error::Config(format!(
                        "need 0 < f_min < f_max and n_points >= 2, got {lo}..{hi} x {n}"
                    )));
                }
                let ratio = (hi / lo).ln();
                (0..n)
                    .map(|k| lo * (ratio * k as f64 / (n - 1) as f64).exp())
                    .collect()
            }
            _ => {
                return Err(Error::Config(
                    "drive needs either `frequencies` or all of `f_min`, `f_max`, `n_points`"
                        .into(),
                ))
            }
        };
        if freqs.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Config("frequencies must be > 0".into()));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("frequencies must be strictly increasing".into()));
        }
        Ok(freqs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossModel {
    #[default]
    None,
    Radiation,
    Convection,
    Both,
}

impl LossModel {
    /// Linearized radial loss rate g (1/s) for the given specimen.
    pub fn loss_rate(&self, spec: &Specimen) -> Result<f64> {
        match self {
            LossModel::None => Ok(0.0),
            LossModel::Radiation => radiation_g(spec),
            LossModel::Convection => convection_g(spec),
            LossModel::Both => Ok(radiation_g(spec)? + convection_g(spec)?),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    /// Series truncation for the spectral engine (odd terms up to n_max).
    pub n_max: u32,
    /// Enable the self-heating feedback term in the time-domain oracle.
    pub include_c_term: bool,
    pub loss: LossModel,
    // GridSpec overrides; defaults derive from the drive when absent
    pub nx: Option<usize>,
    pub steps_per_period: Option<usize>,
    pub settle_periods: Option<usize>,
    pub n_periods: Option<usize>,
    pub periodicity_tol: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_max: 99,
            include_c_term: false,
            loss: LossModel::None,
            nx: None,
            steps_per_period: None,
            settle_periods: None,
            n_periods: None,
            periodicity_tol: None,
        }
    }
}

impl SimulationConfig {
    /// Grid for one drive point: defaults from `GridSpec::default_for`, then
    /// explicit overrides.
    pub fn grid_for(&self, spec: &Specimen, drive: &crate::core_model::Drive) -> Result<GridSpec> {
        let mut grid = GridSpec::default_for(spec, drive)?;
        if let Some(nx) = self.nx {
            grid.nx = nx;
        }
        if let Some(steps) = self.steps_per_period {
            if steps == 0 {
                return Err(Error::Config("simulation.steps_per_period must be > 0".into()));
            }
            grid.dt = drive.period() / steps as f64;
        }
        if let Some(s) = self.settle_periods {
            grid.settle_periods = s;
            grid.n_periods = grid.n_periods.max(s + 2);
        }
        if let Some(n) = self.n_periods {
            grid.n_periods = n;
        }
        if let Some(tol) = self.periodicity_tol {
            grid.periodicity_tol = tol;
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// "eq19" (single-mode) or "eq24" (truncation-corrected).
    pub model: String,
    /// Keep points with 2 omega gamma at or below this bound.
    pub max_reduced_freq: f64,
    pub thresholds: ConditionThresholds,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            model: "eq24".into(),
            max_reduced_freq: 4.0,
            thresholds: ConditionThresholds::default(),
        }
    }
}

impl FitConfig {
    pub fn model(&self) -> Result<AmplitudeModel> {
        match self.model.as_str() {
            "eq19" | "single-mode" => Ok(AmplitudeModel::Eq19),
            "eq24" | "corrected" => Ok(AmplitudeModel::Eq24),
            "series" | "exact-series" => {
                Ok(AmplitudeModel::Series(crate::spectral::SeriesControl::EXACT))
            }
            other => Err(Error::Config(format!(
                "fit.model must be eq19, eq24, or series, got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    /// Output directory; overridable by the THREE_OMEGA_OUT env var.
    pub output_dir: Option<String>,
    /// Input sweep CSV for `fit` runs.
    pub input_csv: Option<String>,
}

/// Measurement-noise model for synthetic sweeps. The seed is mandatory:
/// every random draw in a run flows from it.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Relative gaussian amplitude noise (fraction of each amplitude).
    #[serde(default)]
    pub amplitude_rel: f64,
    /// Absolute gaussian phase noise (radians).
    #[serde(default)]
    pub phase_rad: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.amplitude_rel < 0.0 || !self.amplitude_rel.is_finite() {
            return Err(Error::Config("noise.amplitude_rel must be >= 0".into()));
        }
        if self.phase_rad < 0.0 || !self.phase_rad.is_finite() {
            return Err(Error::Config("noise.phase_rad must be >= 0".into()));
        }
        Ok(())
    }

    pub const NONE: NoiseSpec = NoiseSpec { amplitude_rel: 0.0, phase_rad: 0.0, seed: 0 };
}

/// Batch over substrate temperatures: each point re-resolves the specimen
/// with its own material values, then runs generate + fit independently.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub points: Vec<PipelinePoint>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelinePoint {
    pub t0: Qty,
    pub kappa: Option<Qty>,
    pub cp: Option<Qty>,
    pub resistance: Option<Qty>,
    pub rprime: Option<Qty>,
    pub density: Option<Qty>,
    pub emissivity: Option<f64>,
    pub eta: Option<f64>,
}

impl PipelinePoint {
    /// Base specimen with this temperature point's overrides applied.
    pub fn apply(&self, base: &Specimen) -> Result<Specimen> {
        let mut s = base.clone();
        s.t0 = self.t0.in_unit(Dimension::Temperature)?;
        if let Some(q) = &self.kappa {
            s.kappa = q.in_unit(Dimension::Conductivity)?;
        }
        if let Some(q) = &self.cp {
            s.cp = q.in_unit(Dimension::SpecificHeat)?;
        }
        if let Some(q) = &self.resistance {
            s.resistance = q.in_unit(Dimension::Resistance)?;
        }
        if let Some(q) = &self.rprime {
            s.rprime = q.in_unit(Dimension::ResistanceSlope)?;
        }
        if let Some(q) = &self.density {
            s.density = q.in_unit(Dimension::Density)?;
        }
        if self.emissivity.is_some() {
            s.emissivity = self.emissivity;
        }
        if self.eta.is_some() {
            s.eta = self.eta;
        }
        s.validate()?;
        Ok(s)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(noise) = &cfg.noise {
            noise.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    /// Output directory: THREE_OMEGA_OUT env var wins over the config value,
    /// which defaults to the current directory.
    pub fn output_dir(&self) -> std::path::PathBuf {
        std::env::var("THREE_OMEGA_OUT")
            .ok()
            .or_else(|| self.io.output_dir.clone())
            .unwrap_or_else(|| ".".into())
            .into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const BASE: &str = r#"
        [specimen]
        length = "8 mm"
        diameter = "20 um"
        density = "21.45 g/cm^3"
        cp = 130.0
        kappa = 72.0
        resistance = 1.0
        rprime = 3e-3
        t0 = "300 K"

        [drive]
        i_rms = "10 mA"
        f_min = "0.1 Hz"
        f_max = "100 Hz"
        n_points = 5
    "#;

    #[test]
    fn parses_and_resolves_units() {
        let cfg = RunConfig::from_toml(BASE).unwrap();
        let s = cfg.specimen.resolve().unwrap();
        assert_relative_eq!(s.length, 8e-3, max_relative = 1e-12);
        assert_relative_eq!(s.diameter.unwrap(), 20e-6, max_relative = 1e-12);
        assert_relative_eq!(s.area, std::f64::consts::PI * 1e-10, max_relative = 1e-12);
        assert_relative_eq!(s.density, 21450.0, max_relative = 1e-12);
        assert_relative_eq!(cfg.drive.i_rms().unwrap(), 1e-2, max_relative = 1e-12);
    }

    #[test]
    fn unit_spellings_yield_identical_runs() {
        let a = BASE.replace("\"8 mm\"", "\"0.008 m\"");
        let ca = RunConfig::from_toml(&a).unwrap().specimen.resolve().unwrap();
        let cb = RunConfig::from_toml(BASE).unwrap().specimen.resolve().unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn log_range_frequencies() {
        let cfg = RunConfig::from_toml(BASE).unwrap();
        let f = cfg.drive.frequencies_hz().unwrap();
        assert_eq!(f.len(), 5);
        assert_relative_eq!(f[0], 0.1, max_relative = 1e-12);
        assert_relative_eq!(f[4], 100.0, max_relative = 1e-12);
        // log-spaced: constant ratio
        assert_relative_eq!(f[1] / f[0], f[2] / f[1], max_relative = 1e-12);
    }

    #[test]
    fn explicit_frequency_list() {
        let text = BASE
            .replace("f_min = \"0.1 Hz\"", "frequencies = [1.0, \"2 Hz\", \"1 kHz\"]")
            .replace("f_max = \"100 Hz\"\n", "")
            .replace("n_points = 5\n", "");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.drive.frequencies_hz().unwrap(), vec![1.0, 2.0, 1000.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{BASE}\n[simulation]\nwarp_factor = 9\n");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn missing_cross_section_rejected() {
        let text = BASE.replace("diameter = \"20 um\"\n", "");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert!(cfg.specimen.resolve().is_err());
    }

    #[test]
    fn noise_requires_seed() {
        let with = format!("{BASE}\n[noise]\namplitude_rel = 0.01\nseed = 7\n");
        assert!(RunConfig::from_toml(&with).is_ok());
        let without = format!("{BASE}\n[noise]\namplitude_rel = 0.01\n");
        assert!(RunConfig::from_toml(&without).is_err());
    }

    #[test]
    fn defaults_are_sane() {
        let cfg = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(cfg.simulation.n_max, 99);
        assert!(!cfg.simulation.include_c_term);
        assert_eq!(cfg.simulation.loss, LossModel::None);
        assert_eq!(cfg.fit.model().unwrap(), AmplitudeModel::Eq24);
        assert_relative_eq!(cfg.fit.max_reduced_freq, 4.0);
        assert_relative_eq!(cfg.fit.thresholds.warn, 0.05);
    }

    #[test]
    fn pipeline_point_overrides() {
        let text = format!(
            "{BASE}\n[[pipeline.points]]\nt0 = 100.0\nkappa = 80.0\ncp = 60.0\n"
        );
        let cfg = RunConfig::from_toml(&text).unwrap();
        let base = cfg.specimen.resolve().unwrap();
        let pt = &cfg.pipeline.as_ref().unwrap().points[0];
        let s = pt.apply(&base).unwrap();
        assert_eq!(s.t0, 100.0);
        assert_eq!(s.kappa, 80.0);
        assert_eq!(s.cp, 60.0);
        assert_eq!(s.resistance, base.resistance);
    }

    #[test]
    fn bad_fit_model_rejected() {
        let text = format!("{BASE}\n[fit]\nmodel = \"eq99\"\n");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert!(cfg.fit.model().is_err());
    }
}
