use std::f64::consts::TAU;

use super::{eig_numeric, ComplexMatrix, StateVector};
use crate::error::{Error, Result};

/// `exp(-i H t)` for a Hermitian `H`.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(eig_numeric(h)?.propagator(t))
}

/// `exp(-i H t) ψ` through the spectral decomposition of `H`.
pub fn propagate_const(h: &ComplexMatrix, psi: &StateVector, t: f64) -> Result<StateVector> {
    if h.nrows() != psi.len() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: psi.len() });
    }
    Ok(eig_numeric(h)?.evolve(psi, t))
}

/// Midpoint exponential stepping `ψ ← exp(-i H(t + dt/2) dt) ψ`.
///
/// The interval is split into `ceil((t1 - t0) / dt)` equal steps, so the
/// effective step never exceeds `dt` and a `dt` longer than the interval
/// collapses to a single step.
pub fn propagate_steps<F>(schedule: F, psi: &StateVector, t0: f64, t1: f64, dt: f64) -> Result<StateVector>
where
    F: Fn(f64) -> ComplexMatrix,
{
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(psi.clone());
    }
    let n = (span / dt).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut state = psi.clone();
    for k in 0..n {
        let mid = t0 + (k as f64 + 0.5) * h;
        let hm = schedule(mid);
        if hm.nrows() != state.len() {
            return Err(Error::DimensionMismatch { expected: state.len(), got: hm.nrows() });
        }
        state = eig_numeric(&hm)?.evolve(&state, h);
    }
    Ok(state)
}

/// Default step: the smaller of 1/(50 · max|λ|/2π) and t_g/5000.
pub fn default_dt(max_abs_eigenvalue: f64, t_g: f64) -> f64 {
    let spectral = if max_abs_eigenvalue > 0.0 { TAU / (50.0 * max_abs_eigenvalue) } else { f64::INFINITY };
    spectral.min(t_g / 5000.0)
}
