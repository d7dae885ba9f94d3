//! Unit conversions and physical constants.
//!
//! Every frequency inside the crate is an angular frequency in rad/s and every
//! time is in seconds. Configuration files and reports use the "MHz (divided
//! by 2π)" convention, nanoseconds and microkelvin; conversion happens at the
//! boundary through the helpers below.

use std::f64::consts::TAU;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of a ⁸⁷Rb atom, kg.
pub const RB87_MASS: f64 = 86.909_180_527 * AMU;

/// `f/2π` in MHz to rad/s.
#[inline]
pub fn mhz(f: f64) -> f64 {
    f * 1e6 * TAU
}

/// rad/s to `f/2π` in MHz.
#[inline]
pub fn to_mhz(w: f64) -> f64 {
    w / (1e6 * TAU)
}

/// `f/2π` in GHz to rad/s.
#[inline]
pub fn ghz(f: f64) -> f64 {
    f * 1e9 * TAU
}

/// `f/2π` in THz to rad/s.
#[inline]
pub fn thz(f: f64) -> f64 {
    f * 1e12 * TAU
}

#[inline]
pub fn ns(t: f64) -> f64 {
    t * 1e-9
}

#[inline]
pub fn to_ns(t: f64) -> f64 {
    t * 1e9
}

#[inline]
pub fn us(t: f64) -> f64 {
    t * 1e-6
}

#[inline]
pub fn microkelvin(t: f64) -> f64 {
    t * 1e-6
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_positive(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_symmetric(angle: f64) -> f64 {
    let r = wrap_positive(angle);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Signed distance between two angles, reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_symmetric(a - b)
}
