//! Exact series solution of the linearized heat equation: temperature field,
//! resistance fluctuation, 3-omega phasor, asymptotic limits, and the
//! truncation-error curves.
//!
//! Every odd Fourier mode n contributes a temperature oscillation at 2*omega
//! with phase phi_n, where cot(phi_n) = 2*omega*gamma / n^2. Mixing with the
//! 1-omega current turns each mode into a 3-omega voltage phasor; the exact
//! signal is the complex sum over modes.

use crate::core_model::{derive_thermal, Drive, Specimen};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Series truncation: highest Fourier index retained (only odd terms
/// contribute).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesControl {
    pub n_max: u32,
}

impl SeriesControl {
    /// Effectively exact: the series converges as n^-4.
    pub const EXACT: SeriesControl = SeriesControl { n_max: 99 };
    /// First term only, i.e. the closed-form fitting model.
    pub const FIRST_TERM: SeriesControl = SeriesControl { n_max: 1 };

    pub fn new(n_max: u32) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::parameter("n_max", "must be >= 1"));
        }
        Ok(SeriesControl { n_max })
    }

    fn odd_indices(&self) -> impl Iterator<Item = u32> {
        (1..=self.n_max).step_by(2)
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl::EXACT
    }
}

/// rms amplitude and phase of the 3-omega voltage component. The phase is
/// referenced to the 1-omega current (sin convention) and reported in
/// (-pi, pi]: 180 deg - phi for positive dR/dT, -phi for negative, with
/// tan(phi) = 2*omega*gamma in the single-mode model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phasor3w {
    pub amplitude_rms: f64,
    pub phase: f64,
}

impl Phasor3w {
    /// Fold the reported phase back to the fit variable phi with
    /// tan(phi) = 2*omega*gamma >= 0, undoing the sign-of-R' convention.
    pub fn folded_phi(&self, rprime: f64) -> f64 {
        fold_phase(self.phase, rprime)
    }
}

/// Map a measured 3-omega phase onto phi (tan phi = 2 omega gamma): the
/// lock-in sees 180 deg - phi when R' > 0 and -phi when R' < 0.
pub fn fold_phase(phase: f64, rprime: f64) -> f64 {
    let phi = if rprime > 0.0 { PI - phase } else { -phase };
    wrap_phase(phi)
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_phase(mut phase: f64) -> f64 {
    phase = phase.rem_euclid(2.0 * PI);
    if phase > PI {
        phase -= 2.0 * PI;
    }
    phase
}

/// sin(phi_n) and phi_n for mode n at reduced frequency x = 2*omega*gamma.
/// cot(phi_n) = x / n^2 with phi_n in (0, pi/2].
fn mode_phase(n: u32, x: f64) -> (f64, f64) {
    let n2 = (n as f64) * (n as f64);
    let sin_phi = n2 / (n2 * n2 + x * x).sqrt();
    let phi = FRAC_PI_2 - (x / n2).atan();
    (sin_phi, phi)
}

/// Temperature deviation Delta(x, t) from the substrate temperature (K).
pub fn temperature_profile(
    spec: &Specimen,
    drive: &Drive,
    x: f64,
    t: f64,
    ctl: SeriesControl,
) -> Result<f64> {
    if !(0.0..=spec.length).contains(&x) {
        return Err(Error::OutOfDomain { x, length: spec.length });
    }
    let th = derive_thermal(spec, drive)?;
    let reduced = 2.0 * drive.omega * th.gamma;
    let mut sum = 0.0;
    for n in ctl.odd_indices() {
        let nf = n as f64;
        let (sin_phi, phi) = mode_phase(n, reduced);
        // [1 - (-1)^n] = 2 for odd n.
        let spatial = (nf * PI * x / spec.length).sin() / (nf * nf * nf);
        let temporal = 1.0 - (2.0 * drive.omega * t + phi).sin() * sin_phi;
        sum += spatial * temporal;
    }
    Ok(th.delta0 * sum)
}

/// Resistance fluctuation dR(t) (Ohm), the spatial average of the
/// temperature deviation scaled by dR/dT.
pub fn resistance_fluctuation(
    spec: &Specimen,
    drive: &Drive,
    t: f64,
    ctl: SeriesControl,
) -> Result<f64> {
    let th = derive_thermal(spec, drive)?;
    let reduced = 2.0 * drive.omega * th.gamma;
    let mut sum = 0.0;
    for n in ctl.odd_indices() {
        let nf = n as f64;
        let (sin_phi, phi) = mode_phase(n, reduced);
        // [1 - (-1)^n]^2 / (2 pi n^4) = 2 / (pi n^4) for odd n.
        let weight = 2.0 / (PI * nf.powi(4));
        sum += weight * (1.0 - (2.0 * drive.omega * t + phi).sin() * sin_phi);
    }
    Ok(spec.rprime * th.delta0 * sum)
}

/// Exact 3-omega phasor by analytic complex summation over odd modes.
///
/// The product I0 sin(omega t) * dR(t) turns each mode's 2-omega term into a
/// 3-omega contribution (I0 R' Delta0 / (pi n^4)) sin(phi_n) cos(3 omega t + phi_n).
pub fn v3w_phasor(spec: &Specimen, drive: &Drive, ctl: SeriesControl) -> Result<Phasor3w> {
    let th = derive_thermal(spec, drive)?;
    let reduced = 2.0 * drive.omega * th.gamma;
    let scale = drive.i_peak() * spec.rprime * th.delta0 / PI;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in ctl.odd_indices() {
        let nf = n as f64;
        let (sin_phi, phi) = mode_phase(n, reduced);
        acc += Complex64::from_polar(sin_phi / nf.powi(4), phi);
    }
    let total = scale * acc;
    phasor_from_cos(total)
}

/// Exact 3-omega phasor with a linear radial loss rate `g` (1/s).
///
/// Mode n relaxes at (n^2 + g gamma) / gamma instead of n^2 / gamma, so with
/// G = g gamma each mode carries weight 1 / (n^2 (n^2 + G)) and phase
/// cot(phi_n) = 2 omega gamma / (n^2 + G). At g = 0 this reduces to
/// `v3w_phasor`; keeping only n = 1 reproduces the apparent-parameter map
/// kappa -> (1+G) kappa, gamma -> gamma / (1+G) exactly.
pub fn v3w_phasor_lossy(
    spec: &Specimen,
    drive: &Drive,
    ctl: SeriesControl,
    g: f64,
) -> Result<Phasor3w> {
    if g < 0.0 || !g.is_finite() {
        return Err(Error::parameter("g", format!("must be >= 0, got {g}")));
    }
    let th = derive_thermal(spec, drive)?;
    let x = 2.0 * drive.omega * th.gamma;
    let big_g = g * th.gamma;
    let scale = drive.i_peak() * spec.rprime * th.delta0 / PI;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in ctl.odd_indices() {
        let n2 = (n as f64) * (n as f64);
        let m2 = n2 + big_g;
        let sin_phi = m2 / (m2 * m2 + x * x).sqrt();
        let phi = FRAC_PI_2 - (x / m2).atan();
        acc += Complex64::from_polar(sin_phi / (n2 * m2), phi);
    }
    phasor_from_cos(scale * acc)
}

/// Closed-form single-mode phasor: amplitude 4 I^3 L R R' / (pi^4 kappa S
/// sqrt(1 + (2 omega gamma)^2)), phase per the sign-of-R' rule.
pub fn v3w_first_term(spec: &Specimen, drive: &Drive) -> Result<Phasor3w> {
    let th = derive_thermal(spec, drive)?;
    let reduced = 2.0 * drive.omega * th.gamma;
    let i = drive.i_rms;
    let amplitude = 4.0 * i.powi(3) * spec.length * spec.resistance * spec.rprime.abs()
        / (PI.powi(4) * spec.kappa * spec.area * (1.0 + reduced * reduced).sqrt());
    let phi = reduced.atan();
    let phase = if spec.rprime > 0.0 { PI - phi } else { -phi };
    Ok(Phasor3w { amplitude_rms: amplitude, phase: wrap_phase(phase) })
}

/// Low-frequency plateau of the single-mode amplitude (V, rms):
/// 4 I^3 R R' L / (pi^4 kappa S), equivalently I |R'| Delta0 / pi.
pub fn v3w_low_freq_limit(spec: &Specimen, drive: &Drive) -> Result<f64> {
    spec.validate()?;
    drive.validate()?;
    let i = drive.i_rms;
    Ok(4.0 * i.powi(3) * spec.resistance * spec.rprime.abs() * spec.length
        / (PI.powi(4) * spec.kappa * spec.area))
}

/// High-frequency asymptote of the exact series (V, rms):
/// I^3 R R' / (4 omega rho cp L S).
pub fn v3w_high_freq_limit(spec: &Specimen, drive: &Drive) -> Result<f64> {
    spec.validate()?;
    drive.validate()?;
    let i = drive.i_rms;
    Ok(i.powi(3) * spec.resistance * spec.rprime.abs()
        / (4.0 * drive.omega * spec.density * spec.cp * spec.length * spec.area))
}

/// High-frequency asymptote of the single-mode truncation: coefficient
/// 2/pi^2 in place of the exact 1/4.
pub fn v3w_high_freq_limit_truncated(spec: &Specimen, drive: &Drive) -> Result<f64> {
    let exact = v3w_high_freq_limit(spec, drive)?;
    Ok(exact * (2.0 / (PI * PI)) / 0.25)
}

/// One row of the truncation-error table at reduced frequency x = 2 omega gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCurveRow {
    /// 2 omega gamma.
    pub reduced_freq: f64,
    /// Exact normalized amplitude (sum over odd modes up to `exact` n_max).
    pub exact: f64,
    /// Single-mode normalized amplitude.
    pub first_term: f64,
    /// exact - first_term.
    pub difference: f64,
    /// (exact - first_term) / exact.
    pub relative: f64,
}

/// Normalized truncation-error curves over a reduced-frequency grid.
///
/// Both curves are normalized by the zero-frequency value of the single-mode
/// curve, so `first_term` starts at 1 and `exact` at sum of odd n^-4
/// (about 1.0147).
pub fn error_curves(grid: &[f64], exact: SeriesControl) -> Result<Vec<ErrorCurveRow>> {
    let mut rows = Vec::with_capacity(grid.len());
    for &x in grid {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::parameter("reduced_freq", format!("must be >= 0, got {x}")));
        }
        let a = normalized_amplitude(x, exact);
        let b = normalized_amplitude(x, SeriesControl::FIRST_TERM);
        rows.push(ErrorCurveRow {
            reduced_freq: x,
            exact: a,
            first_term: b,
            difference: a - b,
            relative: (a - b) / a,
        });
    }
    Ok(rows)
}

/// Dimensionless 3-omega amplitude at reduced frequency x, normalized so the
/// single-mode curve equals 1 at x = 0.
pub fn normalized_amplitude(x: f64, ctl: SeriesControl) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in ctl.odd_indices() {
        let nf = n as f64;
        let (sin_phi, phi) = mode_phase(n, x);
        acc += Complex64::from_polar(sin_phi / nf.powi(4), phi);
    }
    acc.norm()
}

/// `normalized_amplitude` together with its derivative dA/dx, for fitting
/// the full series model with an analytic Jacobian.
pub fn normalized_amplitude_and_slope(x: f64, ctl: SeriesControl) -> (f64, f64) {
    let mut z = Complex64::new(0.0, 0.0);
    let mut dz = Complex64::new(0.0, 0.0);
    for n in ctl.odd_indices() {
        let n2 = (n as f64) * (n as f64);
        let denom = n2 * n2 + x * x;
        let root = denom.sqrt();
        let sin_phi = n2 / root;
        let phi = FRAC_PI_2 - (x / n2).atan();
        let e = Complex64::from_polar(1.0, phi);
        let w = sin_phi / (n2 * n2);
        z += w * e;
        // d(sin_phi)/dx = -n^2 x / denom^(3/2); d(phi)/dx = -n^2 / denom
        let dw = -n2 * x / (denom * root) / (n2 * n2);
        let dphi = -n2 / denom;
        dz += (dw + Complex64::new(0.0, 1.0) * w * dphi) * e;
    }
    let a = z.norm();
    let da = if a > 0.0 { (z.conj() * dz).re / a } else { 0.0 };
    (a, da)
}

/// Convert a complex amplitude in the cos(3 omega t + arg) convention into a
/// sin-referenced `Phasor3w` (rms amplitude, phase in (-pi, pi]).
fn phasor_from_cos(c: Complex64) -> Result<Phasor3w> {
    // A cos(3wt + arg) = A sin(3wt + arg + pi/2)
    Ok(Phasor3w {
        amplitude_rms: c.norm() / std::f64::consts::SQRT_2,
        phase: wrap_phase(c.arg() + FRAC_PI_2),
    })
}
