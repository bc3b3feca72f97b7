//! Unit conversions and physical constants.
//!
//! Internal convention: durations in nanoseconds, angular frequencies in
//! rad/ns. Public interfaces quote durations in picoseconds and frequencies
//! as cyclic GHz; conversion happens once at the boundary. With these units
//! a 1 GHz cyclic frequency is exactly 2π rad/ns, and lifetimes of tens of
//! picoseconds land near 0.05-0.7 ns, keeping exponents well conditioned.

use crate::float::{tau, Real};

/// Planck constant, J·s (exact SI).
pub const PLANCK_JS: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s (exact SI).
pub const SPEED_OF_LIGHT_M_S: f64 = 2.997_924_58e8;

#[inline]
pub fn ps_to_ns<T: Real>(ps: T) -> T {
    ps * T::of(1e-3)
}

#[inline]
pub fn ns_to_ps<T: Real>(ns: T) -> T {
    ns * T::of(1e3)
}

/// Cyclic GHz to angular rad/ns (multiply by 2π).
#[inline]
pub fn ghz_to_rad_ns<T: Real>(ghz: T) -> T {
    ghz * tau::<T>()
}

/// Angular rad/ns to cyclic GHz.
#[inline]
pub fn rad_ns_to_ghz<T: Real>(w: T) -> T {
    w / tau::<T>()
}

/// Photon energy at vacuum wavelength `lambda_nm`, in joules.
#[inline]
pub fn photon_energy_j(lambda_nm: f64) -> f64 {
    PLANCK_JS * SPEED_OF_LIGHT_M_S / (lambda_nm * 1e-9)
}
