//! Design and verification of two-qubit Rydberg gates built from detuned
//! Rabi cycles that interfere at integer resonances.
//!
//! Internally every frequency is an angular frequency in rad/s and every time
//! is in seconds; [`units`] converts to and from the MHz/ns/µK presentation
//! units.

pub mod atomic;
pub mod basis;
pub mod design_u1;
pub mod design_u2;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod noise;
pub mod par;
pub mod qmath;
pub mod rng;
pub mod synth;
pub mod units;

pub use error::{Error, Result};
