//! Domain types and derived quantities shared by the forward model, the
//! time-domain solver, and the fitter.
//!
//! All quantities are strict SI internally. Unit suffixes (`mm`, `mA`, ...)
//! are resolved at the config boundary, never here.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Stefan-Boltzmann constant (W/m^2 K^4).
pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;

/// Free-electron Lorenz number (W Ohm/K^2), for Wiedemann-Franz comparisons.
pub const LORENZ_FREE_ELECTRON: f64 = 2.45e-8;

/// A rod- or filament-like specimen suspended between voltage contacts,
/// heat-sunk at both ends to a substrate at `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Specimen {
    /// Length between voltage contacts (m).
    pub length: f64,
    /// Cross-sectional area (m^2).
    pub area: f64,
    /// Diameter (m), for cylindrical specimens; required by heat-loss formulas.
    pub diameter: Option<f64>,
    /// Mass density (kg/m^3).
    pub density: f64,
    /// Specific heat (J/kg K).
    pub cp: f64,
    /// Thermal conductivity (W/m K).
    pub kappa: f64,
    /// Electrical resistance between voltage contacts at `t0` (Ohm).
    pub resistance: f64,
    /// dR/dT at `t0` (Ohm/K). Either sign, never zero.
    pub rprime: f64,
    /// Substrate temperature (K).
    pub t0: f64,
    /// Surface emissivity in [0, 1].
    pub emissivity: Option<f64>,
    /// Surface thermal conductivity for gas convection (W/m^2 K).
    pub eta: Option<f64>,
}

impl Specimen {
    /// Check every field invariant. Call this at every construction boundary;
    /// the numeric operations assume it has passed.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("area", self.area),
            ("density", self.density),
            ("cp", self.cp),
            ("kappa", self.kappa),
            ("resistance", self.resistance),
            ("t0", self.t0),
        ];
        for (field, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::parameter(field, format!("must be > 0, got {value}")));
            }
        }
        if self.rprime == 0.0 || !self.rprime.is_finite() {
            // Zero dR/dT produces no 3-omega signal at all.
            return Err(Error::parameter(
                "rprime",
                "must be nonzero (zero temperature coefficient gives no signal)",
            ));
        }
        if let Some(d) = self.diameter {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::parameter("diameter", format!("must be > 0, got {d}")));
            }
        }
        if let Some(e) = self.emissivity {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::parameter(
                    "emissivity",
                    format!("must lie in [0, 1], got {e}"),
                ));
            }
        }
        if let Some(eta) = self.eta {
            if eta < 0.0 || !eta.is_finite() {
                return Err(Error::parameter("eta", format!("must be >= 0, got {eta}")));
            }
        }
        Ok(())
    }

    /// Cross-section consistency for cylindrical specimens. `S` may be
    /// measured independently of `D`, so a mismatch is a warning, not an
    /// error. Returns the relative deviation when it exceeds `tolerance`.
    pub fn cylindrical_mismatch(&self, tolerance: f64) -> Option<f64> {
        let d = self.diameter?;
        let s_cyl = PI * d * d / 4.0;
        let dev = (self.area - s_cyl).abs() / s_cyl;
        (dev > tolerance).then_some(dev)
    }

    /// Electrical resistivity rho_e = R S / L (Ohm m).
    pub fn resistivity(&self) -> f64 {
        self.resistance * self.area / self.length
    }
}

/// The ac excitation `I0 sin(omega t)`, specified by its rms value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// rms excitation current (A).
    pub i_rms: f64,
    /// Angular frequency of the current (rad/s).
    pub omega: f64,
}

impl Drive {
    pub fn validate(&self) -> Result<()> {
        if !(self.i_rms > 0.0) || !self.i_rms.is_finite() {
            return Err(Error::parameter("i_rms", format!("must be > 0, got {}", self.i_rms)));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::parameter("omega", format!("must be > 0, got {}", self.omega)));
        }
        Ok(())
    }

    /// Peak current I0 = sqrt(2) * I_rms.
    pub fn i_peak(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.i_rms
    }

    /// Drive period 2 pi / omega (s).
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Quantities derived from a specimen under a given drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedThermal {
    /// Thermal diffusivity kappa / (rho cp) (m^2/s).
    pub alpha: f64,
    /// Axial thermal time constant L^2 / (pi^2 alpha) (s).
    pub gamma: f64,
    /// Maximum dc temperature accumulation scale at the specimen center (K).
    pub delta0: f64,
    /// Volumetric heating rate b = I0^2 R / (rho cp L S) (K/s).
    pub heating_rate: f64,
}

/// Compute diffusivity, axial time constant, and the dc accumulation scale.
///
/// delta0 = 2 gamma b / pi = 2 I0^2 R L / (pi^3 kappa S).
pub fn derive_thermal(spec: &Specimen, drive: &Drive) -> Result<DerivedThermal> {
    spec.validate()?;
    drive.validate()?;
    let alpha = spec.kappa / (spec.density * spec.cp);
    let gamma = spec.length * spec.length / (PI * PI * alpha);
    let i0_sq = 2.0 * drive.i_rms * drive.i_rms;
    let b = i0_sq * spec.resistance / (spec.density * spec.cp * spec.length * spec.area);
    let delta0 = 2.0 * gamma * b / PI;
    Ok(DerivedThermal {
        alpha,
        gamma,
        delta0,
        heating_rate: b,
    })
}

/// Heating-inhomogeneity ratio I0^2 |R'| L / (n^2 pi^2 kappa S) for mode `n`.
/// Must stay well below 1 for the linearized model to hold.
pub fn condition_10(spec: &Specimen, drive: &Drive, n: u32) -> Result<f64> {
    spec.validate()?;
    drive.validate()?;
    if n < 1 {
        return Err(Error::parameter("n", "mode index must be >= 1"));
    }
    let i0_sq = 2.0 * drive.i_rms * drive.i_rms;
    let n2 = (n as f64) * (n as f64);
    Ok(i0_sq * spec.rprime.abs() * spec.length / (n2 * PI * PI * spec.kappa * spec.area))
}

/// Radiative loss rate g = 16 eps sigma T0^3 / (rho cp D) (1/s), from the
/// linearized black-body exchange with the surroundings at T0.
pub fn radiation_g(spec: &Specimen) -> Result<f64> {
    spec.validate()?;
    let d = spec.diameter.ok_or(Error::MissingField("diameter"))?;
    let eps = spec.emissivity.ok_or(Error::MissingField("emissivity"))?;
    Ok(16.0 * eps * STEFAN_BOLTZMANN * spec.t0.powi(3) / (spec.density * spec.cp * d))
}

/// Gas-convection loss rate g = 4 eta / (rho cp D) (1/s) for a cylinder.
pub fn convection_g(spec: &Specimen) -> Result<f64> {
    spec.validate()?;
    let d = spec.diameter.ok_or(Error::MissingField("diameter"))?;
    let eta = spec.eta.ok_or(Error::MissingField("eta"))?;
    Ok(4.0 * eta / (spec.density * spec.cp * d))
}

/// Warn/fail thresholds for the validity diagnostics (condition on heating
/// inhomogeneity and on g*gamma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionThresholds {
    pub warn: f64,
    pub fail: f64,
}

impl Default for ConditionThresholds {
    fn default() -> Self {
        ConditionThresholds { warn: 0.05, fail: 0.2 }
    }
}
