//! Terahertz ultra-massive MIMO hybrid beamforming.
//!
//! Array layouts and near-field limits live in [`geometry`], the sparse
//! multipath channel in [`channel`], the hardware models (connectivity masks,
//! switch networks, phase shifters and true-time-delay lines) in
//! [`architectures`], the beamforming solvers in [`algorithms`] and the
//! rate/power/array-gain figures of merit in [`metrics`]. [`experiments`]
//! wires everything into config-driven sweeps that write CSV.
//!
//! Heavy loops (subcarriers, sweep points, candidate switch sets) go through
//! [`exec`], which uses rayon when the `parallel` feature is enabled and
//! falls back to plain iteration otherwise. Results never depend on the
//! execution mode.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod architectures;
pub mod channel;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod metrics;

pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;

/// Propagation speed (m/s). The rounded value keeps wavelengths at the
/// usual round numbers (1 mm at 0.3 THz).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Wavelength in meters at frequency `f` (Hz).
pub fn wavelength(f: f64) -> f64 {
    SPEED_OF_LIGHT / f
}
