//! Brute-force time-domain solver for the unapproximated heat equation
//!
//!   d/dt Delta - alpha d2/dx2 Delta + (g - c sin^2(omega t)) Delta = b sin^2(omega t)
//!
//! with Delta = 0 at both contacts. Crank-Nicolson in time, central
//! differences in space; the time-varying reaction coefficient stays inside
//! the implicit operator so the scheme remains unconditionally stable.
//! Used to validate every spectral-series result.

use crate::core_model::{derive_thermal, Drive, Specimen};
use crate::error::{Error, Result};
use crate::lockin;

/// Samples recorded per drive period; harmonic 3 needs at least 8, 64 gives
/// quadrature headroom.
pub const SAMPLES_PER_PERIOD: usize = 64;

/// Discretization and run-length control for the time-domain solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Number of interior spatial nodes.
    pub nx: usize,
    /// Time step (s). Rounded inside `solve` so a drive period is an exact
    /// multiple of steps.
    pub dt: f64,
    /// Maximum number of drive periods to simulate.
    pub n_periods: usize,
    /// Periods discarded before the periodicity check begins.
    pub settle_periods: usize,
    /// Relative L-infinity defect between consecutive periods of dR that
    /// counts as periodic steady state.
    pub periodicity_tol: f64,
}

impl GridSpec {
    /// Default grid for a given drive: 129 interior nodes, 512 steps per
    /// period, settle window sized from the transient decay time gamma.
    pub fn default_for(spec: &Specimen, drive: &Drive) -> Result<GridSpec> {
        let th = derive_thermal(spec, drive)?;
        let period = drive.period();
        // slowest transient decays as exp(-t/gamma); 18 gamma reaches ~1e-8
        let settle = ((18.0 * th.gamma / period).ceil() as usize).max(2);
        Ok(GridSpec {
            nx: 129,
            dt: period / 512.0,
            n_periods: settle + 16,
            settle_periods: settle,
            periodicity_tol: 1e-6,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 16 {
            return Err(Error::parameter("nx", format!("must be >= 16, got {}", self.nx)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::parameter("dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.settle_periods < 1 || self.n_periods <= self.settle_periods {
            return Err(Error::parameter(
                "n_periods",
                format!(
                    "need n_periods > settle_periods >= 1, got {} / {}",
                    self.n_periods, self.settle_periods
                ),
            ));
        }
        if !(self.periodicity_tol > 0.0) {
            return Err(Error::parameter("periodicity_tol", "must be > 0"));
        }
        Ok(())
    }
}

/// Sampled steady-periodic traces from the time-domain solve. The window
/// spans the last two simulated drive periods.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    /// Sample times (s), uniform.
    pub times: Vec<f64>,
    /// Resistance fluctuation dR(t) (Ohm).
    pub dr: Vec<f64>,
    /// Terminal voltage I0 sin(omega t) (R + dR(t)) (V).
    pub voltage: Vec<f64>,
    /// Temperature deviation at the specimen center (K).
    pub center_temp: Vec<f64>,
    /// Achieved relative periodicity defect between the last two periods.
    pub periodicity_defect: f64,
    /// Full temperature profile at the final step (interior nodes).
    pub final_profile: Vec<f64>,
    /// Drive frequency the trace was generated with (rad/s).
    pub omega: f64,
}

impl TraceResult {
    pub fn samples_per_period(&self) -> usize {
        self.times.len() / 2
    }
}

/// Integrate the PDE to periodic steady state and return sampled traces.
///
/// `include_c_term` enables the self-heating feedback c sin^2(omega t) Delta
/// that the spectral solution drops; `g` is the linear radial-loss rate.
pub fn solve(
    spec: &Specimen,
    drive: &Drive,
    grid: &GridSpec,
    include_c_term: bool,
    g: f64,
) -> Result<TraceResult> {
    grid.validate()?;
    if g < 0.0 || !g.is_finite() {
        return Err(Error::parameter("g", format!("must be >= 0, got {g}")));
    }
    let th = derive_thermal(spec, drive)?;
    let period = drive.period();

    // snap dt so a period is an integer multiple of steps, divisible by the
    // sampling rate
    let raw_steps = (period / grid.dt).round().max(SAMPLES_PER_PERIOD as f64) as usize;
    let steps_per_period = raw_steps.div_ceil(SAMPLES_PER_PERIOD) * SAMPLES_PER_PERIOD;
    let dt = period / steps_per_period as f64;
    let stride = steps_per_period / SAMPLES_PER_PERIOD;

    let nx = grid.nx;
    let dx = spec.length / (nx + 1) as f64;
    let i0 = drive.i_peak();
    let c_coef = if include_c_term {
        i0 * i0 * spec.rprime / (spec.density * spec.cp * spec.length * spec.area)
    } else {
        0.0
    };
    let r = th.alpha * dt / (2.0 * dx * dx);

    let mut u = vec![0.0; nx];
    let mut rhs = vec![0.0; nx];
    // Thomas algorithm scratch
    let mut cp_scratch = vec![0.0; nx];

    let mut prev_period: Vec<f64> = Vec::new();
    let mut curr_period: Vec<(f64, Vec<f64>)> = Vec::new(); // (dR, profile snapshot times not needed)
    let mut sampled: Vec<(f64, f64, f64)> = Vec::new(); // (t, dR, center)
    let center = nx.div_ceil(2); // 1-based interior index of x = L/2 for odd nx
    let center_idx = center - 1;

    let mut defect = f64::INFINITY;
    let mut converged = false;
    let mut completed = 0usize;

    'periods: for p in 0..grid.n_periods {
        curr_period.clear();
        for k in 0..steps_per_period {
            let t0 = (p * steps_per_period + k) as f64 * dt;
            let t1 = t0 + dt;
            let s0 = (drive.omega * t0).sin().powi(2);
            let s1 = (drive.omega * t1).sin().powi(2);
            let react0 = (c_coef * s0 - g) * dt / 2.0;
            let react1 = (c_coef * s1 - g) * dt / 2.0;
            let force = th.heating_rate * dt * (s0 + s1) / 2.0;

            // rhs = (I + dt/2 (alpha D2 + react0)) u + force
            for j in 0..nx {
                let left = if j > 0 { u[j - 1] } else { 0.0 };
                let right = if j + 1 < nx { u[j + 1] } else { 0.0 };
                rhs[j] = u[j] * (1.0 - 2.0 * r + react0) + r * (left + right) + force;
            }
            // solve (I - dt/2 (alpha D2 + react1)) u_new = rhs
            let diag = 1.0 + 2.0 * r - react1;
            let off = -r;
            thomas_constant(diag, off, &mut rhs, &mut cp_scratch, &mut u);

            if (k + 1) % stride == 0 {
                let dr = spec.rprime / spec.length * trapezoid_zero_bc(&u, dx);
                if p >= grid.settle_periods {
                    sampled.push((t1, dr, u[center_idx]));
                }
                curr_period.push((dr, Vec::new()));
            }
        }
        completed = p + 1;
        if p >= grid.settle_periods {
            if !prev_period.is_empty() {
                let scale = curr_period
                    .iter()
                    .map(|(d, _)| d.abs())
                    .fold(0.0f64, f64::max)
                    .max(1e-300);
                defect = curr_period
                    .iter()
                    .zip(prev_period.iter())
                    .map(|((d, _), pd)| (d - pd).abs())
                    .fold(0.0f64, f64::max)
                    / scale;
                if defect < grid.periodicity_tol && sampled.len() >= 2 * SAMPLES_PER_PERIOD {
                    converged = true;
                    break 'periods;
                }
            }
            prev_period.clear();
            prev_period.extend(curr_period.iter().map(|(d, _)| *d));
        }
    }

    if !converged {
        return Err(Error::Convergence {
            periods: completed,
            defect,
            tolerance: grid.periodicity_tol,
        });
    }

    // keep exactly the last two periods
    let keep = 2 * SAMPLES_PER_PERIOD;
    let start = sampled.len() - keep;
    let window = &sampled[start..];
    let times: Vec<f64> = window.iter().map(|s| s.0).collect();
    let dr: Vec<f64> = window.iter().map(|s| s.1).collect();
    let center_temp: Vec<f64> = window.iter().map(|s| s.2).collect();
    let voltage: Vec<f64> = window
        .iter()
        .map(|s| i0 * (drive.omega * s.0).sin() * (spec.resistance + s.1))
        .collect();

    Ok(TraceResult {
        times,
        dr,
        voltage,
        center_temp,
        periodicity_defect: defect,
        final_profile: u,
        omega: drive.omega,
    })
}

/// Steady temperature profile under constant volumetric heating `power`
/// (K/s units, i.e. the b of the ac problem applied as dc), with loss rate
/// `g`: solves alpha u'' - g u = -power directly. Returns interior nodes.
pub fn steady_dc_profile(spec: &Specimen, drive: &Drive, nx: usize, g: f64) -> Result<Vec<f64>> {
    let th = derive_thermal(spec, drive)?;
    let dx = spec.length / (nx + 1) as f64;
    let a = th.alpha / (dx * dx);
    let diag = 2.0 * a + g;
    let off = -a;
    let mut rhs = vec![th.heating_rate; nx];
    let mut scratch = vec![0.0; nx];
    let mut u = vec![0.0; nx];
    thomas_constant(diag, off, &mut rhs, &mut scratch, &mut u);
    Ok(u)
}

/// Apparent (kappa, gamma) recovered by sweeping the oracle with loss rate
/// `g`, demodulating at 3 omega, and fitting the full series model (a
/// truncated closed form would fold its own ~2% series-truncation bias into
/// the recovered values).
pub fn apparent_from_oracle(
    spec: &Specimen,
    drive: &Drive,
    grid_template: Option<&GridSpec>,
    g: f64,
) -> Result<(f64, f64)> {
    use crate::fitter::{fit_amplitude, AmplitudeModel, SweepDataset, V3wPoint};

    let th = derive_thermal(spec, drive)?;
    let gamma_ap = th.gamma / (1.0 + g * th.gamma);
    // 12 points spanning the informative band of the apparent response
    let n_points = 12;
    let mut points = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let reduced = 0.25 + 3.5 * k as f64 / (n_points - 1) as f64;
        let omega = reduced / (2.0 * gamma_ap);
        let d = Drive { i_rms: drive.i_rms, omega };
        let grid = match grid_template {
            Some(gs) => GridSpec { dt: d.period() / 512.0, ..*gs },
            None => GridSpec::default_for(spec, &d)?,
        };
        let trace = solve(spec, &d, &grid, false, g)?;
        let dem = lockin::demodulate(&trace.times, &trace.voltage, omega, 3)?;
        points.push(V3wPoint {
            omega,
            amplitude_rms: dem.amplitude_rms,
            phase: Some(dem.phase),
            sigma: None,
        });
    }
    let dataset = SweepDataset::new(points, spec.clone(), drive.i_rms)?;
    let fit = fit_amplitude(
        &dataset,
        AmplitudeModel::Series(crate::spectral::SeriesControl::EXACT),
    )?;
    Ok((fit.kappa, fit.gamma))
}

/// Trapezoid rule over interior nodes with zero boundary values: reduces to
/// dx * sum(u).
fn trapezoid_zero_bc(u: &[f64], dx: f64) -> f64 {
    dx * u.iter().sum::<f64>()
}

/// Thomas solve for a constant-coefficient symmetric tridiagonal system
/// (diag, off) x = rhs. `rhs` is consumed as scratch.
fn thomas_constant(diag: f64, off: f64, rhs: &mut [f64], scratch: &mut [f64], x: &mut [f64]) {
    let n = rhs.len();
    scratch[0] = off / diag;
    rhs[0] /= diag;
    for j in 1..n {
        let m = 1.0 / (diag - off * scratch[j - 1]);
        scratch[j] = off * m;
        rhs[j] = (rhs[j] - off * rhs[j - 1]) * m;
    }
    x[n - 1] = rhs[n - 1];
    for j in (0..n - 1).rev() {
        x[j] = rhs[j] - scratch[j] * x[j + 1];
    }
}
