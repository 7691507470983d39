//! End-to-end toolkit for 3-omega thermal measurements of rod- and
//! filament-like specimens: an exact spectral forward model of the 3-omega
//! voltage, a finite-difference oracle of the raw heat equation, a digital
//! lock-in demodulator, and a nonlinear least-squares fitter that recovers
//! thermal conductivity and specific heat from frequency sweeps, including
//! validity diagnostics and radial heat-loss corrections.

// `!(x > 0.0)` is used throughout input validation on purpose: unlike
// `x <= 0.0`, it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod core_model;
pub mod csvio;
pub mod error;
pub mod fdm;
pub mod fitter;
pub mod lockin;
pub mod report;
pub mod spectral;
pub mod sweep;
pub mod units;

pub use core_model::{Drive, Specimen};
pub use error::{Error, Result};
