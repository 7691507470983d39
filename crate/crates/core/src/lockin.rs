//! Digital lock-in: quadrature extraction of one harmonic's rms amplitude
//! and phase from a uniformly sampled trace, relative to the 1-omega drive.
//!
//! Rectangular window over exact integer periods, no filtering: for a
//! periodic signal this quadrature is exact.

use crate::error::{Error, Result};
use crate::spectral::wrap_phase;

/// One demodulated harmonic. Phase follows the sin convention: an input
/// A sin(k omega t + theta) yields `phase = theta` and
/// `amplitude_rms = A / sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demodulated {
    pub harmonic: u32,
    pub amplitude_rms: f64,
    /// Radians in (-pi, pi], relative to the 1-omega reference.
    pub phase: f64,
}

/// Quadrature-demodulate harmonic `k` of `samples` taken at `times`
/// (uniform spacing) against the reference sin(omega t).
pub fn demodulate(times: &[f64], samples: &[f64], omega: f64, k: u32) -> Result<Demodulated> {
    if times.len() != samples.len() || times.len() < 2 {
        return Err(Error::Input(format!(
            "trace length mismatch or too short: {} times, {} samples",
            times.len(),
            samples.len()
        )));
    }
    let n = times.len();
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::Input("non-increasing time grid".into()));
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let span = n as f64 * dt;
    let periods = span / period;
    if (periods - periods.round()).abs() > 1e-6 * periods.max(1.0) || periods.round() < 1.0 {
        return Err(Error::Windowing { periods });
    }
    let samples_per_period = (period / dt).round() as usize;
    if samples_per_period < 8 || samples_per_period < 2 * k as usize + 2 {
        return Err(Error::Aliasing {
            harmonic: k,
            samples_per_period,
        });
    }

    let kw = k as f64 * omega;
    let mut x = 0.0; // sin quadrature
    let mut y = 0.0; // cos quadrature
    for (&t, &v) in times.iter().zip(samples) {
        let (s, c) = (kw * t).sin_cos();
        x += v * s;
        y += v * c;
    }
    x *= 2.0 / n as f64;
    y *= 2.0 / n as f64;

    Ok(Demodulated {
        harmonic: k,
        amplitude_rms: (x * x + y * y).sqrt() / std::f64::consts::SQRT_2,
        phase: wrap_phase(y.atan2(x)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn grid(omega: f64, periods: usize, spp: usize) -> Vec<f64> {
        let dt = 2.0 * PI / omega / spp as f64;
        (0..periods * spp).map(|i| (i as f64 + 1.0) * dt).collect()
    }

    #[test]
    fn pure_third_harmonic() {
        let omega = 7.3;
        let times = grid(omega, 2, 64);
        let v: Vec<f64> = times.iter().map(|&t| (3.0 * omega * t).sin()).collect();
        let d = demodulate(&times, &v, omega, 3).unwrap();
        assert_relative_eq!(d.amplitude_rms, 1.0 / 2f64.sqrt(), max_relative = 1e-12);
        assert_abs_diff_eq!(d.phase, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonality_of_other_harmonics() {
        let omega = 2.0;
        let times = grid(omega, 3, 64);
        let v: Vec<f64> = times.iter().map(|&t| (omega * t).sin()).collect();
        let d = demodulate(&times, &v, omega, 3).unwrap();
        assert!(d.amplitude_rms < 1e-12);
    }

    #[test]
    fn phase_recovery() {
        let omega = 11.0;
        let theta = 2.2;
        let times = grid(omega, 4, 128);
        let v: Vec<f64> = times.iter().map(|&t| 0.3 * (3.0 * omega * t + theta).sin()).collect();
        let d = demodulate(&times, &v, omega, 3).unwrap();
        assert_abs_diff_eq!(d.phase, theta, epsilon = 1e-12);
        assert_relative_eq!(d.amplitude_rms, 0.3 / 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn delay_shifts_phase_linearly() {
        let omega = 5.0;
        let tau = 0.013;
        let times = grid(omega, 2, 64);
        let base: Vec<f64> = times.iter().map(|&t| (3.0 * omega * t).sin()).collect();
        let delayed: Vec<f64> = times.iter().map(|&t| (3.0 * omega * (t - tau)).sin()).collect();
        let d0 = demodulate(&times, &base, omega, 3).unwrap();
        let d1 = demodulate(&times, &delayed, omega, 3).unwrap();
        let expected = wrap_phase(d0.phase - 3.0 * omega * tau);
        assert_abs_diff_eq!(d1.phase, expected, epsilon = 1e-12);
    }

    #[test]
    fn window_doubling_is_invariant() {
        let omega = 3.0;
        let short = grid(omega, 2, 64);
        let long = grid(omega, 4, 64);
        let f = |ts: &[f64]| -> Vec<f64> {
            ts.iter().map(|&t| 0.7 * (3.0 * omega * t + 0.4).sin()).collect()
        };
        let vs = f(&short);
        let vl = f(&long);
        let ds = demodulate(&short, &vs, omega, 3).unwrap();
        let dl = demodulate(&long, &vl, omega, 3).unwrap();
        assert_relative_eq!(ds.amplitude_rms, dl.amplitude_rms, max_relative = 1e-12);
        assert_abs_diff_eq!(ds.phase, dl.phase, epsilon = 1e-12);
    }

    #[test]
    fn rejects_fractional_window() {
        let omega = 2.0;
        let mut times = grid(omega, 2, 64);
        times.truncate(100); // 1.5625 periods
        let v = vec![0.0; 100];
        assert!(matches!(
            demodulate(&times, &v, omega, 3),
            Err(Error::Windowing { .. })
        ));
    }

    #[test]
    fn rejects_undersampled_harmonic() {
        let omega = 2.0;
        let times = grid(omega, 2, 4);
        let v = vec![0.0; times.len()];
        assert!(matches!(
            demodulate(&times, &v, omega, 3),
            Err(Error::Aliasing { .. })
        ));
    }
}
