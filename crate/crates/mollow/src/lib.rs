//! Simulation and parameter-estimation toolkit for resonance fluorescence of
//! a cavity-coupled two-level emitter.
//!
//! The crate has three layers:
//!
//! * numeric ground truth ([`bloch`]): optical Bloch equations, steady
//!   state, and correlation functions / spectra from the quantum regression
//!   theorem;
//! * closed forms ([`mollow`], [`correlations`]): the damped-oscillator
//!   expressions for the emission spectrum, g²(τ), the incoherent g¹, the
//!   interference visibility, and the cascaded sideband cross-correlation —
//!   each cross-checked against the numeric layer in the test suite;
//! * everything around the emitter ([`instrument`], [`mc`], [`fit`]):
//!   flux calibration, saturation, laser background, IRF and filter
//!   convolutions, blinking, quantum-jump photon streams with a time-tag
//!   correlator, and damped Gauss–Newton fits with uncertainty reporting.
//!
//! Math kernels are generic over the scalar type via [`float::Real`]
//! (`f32` or `f64`); the common `f64` instantiations have aliases at the
//! crate root. Stochastic and wire-format code (photon streams, tag files)
//! is fixed to `f64` time accumulators and `u64` picosecond tags.
//!
//! Unit convention: durations in ps and frequencies in cyclic GHz at public
//! boundaries; nanoseconds and rad/ns internally (see [`units`]).

// `!(x > 0)`-style guards are deliberate: they reject NaN along with the
// out-of-domain values, which `x <= 0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// indexed loops in the small dense-matrix code read better than iterator
// chains over row/column pairs
#![allow(clippy::needless_range_loop)]

pub mod bloch;
pub mod correlations;
pub mod error;
pub mod fit;
pub mod float;
pub mod instrument;
pub mod mc;
pub mod mollow;
pub mod ode;
pub mod peaks;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
pub use float::Real;

/// Concrete `f64` aliases for the generic domain types.
pub type EmitterParams64 = bloch::EmitterParams<f64>;
pub type DriveParams64 = bloch::DriveParams<f64>;
pub type BlochState64 = bloch::BlochState<f64>;
pub type CorrelationTrace64 = trace::CorrelationTrace<f64>;
pub type SpectrumTrace64 = trace::SpectrumTrace<f64>;
pub type MollowCoefficients64 = mollow::MollowCoefficients<f64>;
pub type InstrumentModel64 = instrument::InstrumentModel<f64>;
pub type FluxCalibration64 = instrument::FluxCalibration<f64>;
pub type SaturationParams64 = instrument::SaturationParams<f64>;
pub type BlinkingModel64 = instrument::BlinkingModel<f64>;
pub type CascadeModel64 = correlations::CascadeModel<f64>;
pub type VisibilityModel64 = correlations::VisibilityModel<f64>;
pub type DataSeries64 = fit::DataSeries<f64>;
pub type FitResult64 = fit::FitResult<f64>;
