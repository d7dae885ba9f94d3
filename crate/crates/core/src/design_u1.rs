//! Single-pulse gate `U₁ = diag(1, e^{iα}, e^{iα}, e^{iβ})`: integer-resonance
//! conditions, phases, intrinsic errors and the parameter search.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_3, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::basis::{comp, single, v1};
use crate::error::{Error, Result};
use crate::model::{h_single, h_v1, InteractionParams, LaserParams};
use crate::par::{map_indexed, ExecMode};
use crate::qmath::{
    basis_state, default_dt, diag, eig3_shengjin, eig_numeric, nelder_mead, ComplexMatrix, EigenSystem,
    NelderMeadOptions, C64,
};
use crate::units::mhz;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDesignU1 {
    pub laser: LaserParams,
    pub interaction: InteractionParams,
    pub n: u32,
    /// Integer cycle counts with M1 + M2 + M3 = 0, matched to 𝒞1 ≥ 𝒞2 ≥ 𝒞3.
    pub m: [i32; 3],
    pub t_g: f64,
    /// Unreduced single-excitation phase.
    pub alpha: f64,
    /// Unreduced closed-form phase −(Δ + V/3) t_g.
    pub beta: f64,
    pub e_ro: f64,
    /// Decay error numerator in seconds; divide by the lifetime.
    pub e_de_per_tau: f64,
}

/// Stark-shift frequencies 𝒞1 ≥ 𝒞2 ≥ 𝒞3 with Σ𝒞 = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkFrequencies {
    pub c: [f64; 3],
    pub degenerate: bool,
}

/// `2Nπ / √(|Ω|² + Δ²)`.
pub fn gate_time(l: &LaserParams, n: u32) -> Result<f64> {
    let ob = l.rabi_bar();
    if !(ob > 0.0) {
        return Err(Error::param("laser", "generalized Rabi frequency is zero"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    Ok(TAU * n as f64 / ob)
}

/// `−Nπ(1 + Δ/Ω̄)`, unreduced.
pub fn alpha_angle(l: &LaserParams, n: u32) -> f64 {
    let ob = l.rabi_bar();
    let ratio = if ob > 0.0 { l.detuning / ob } else { 0.0 };
    -(n as f64) * PI * (1.0 + ratio)
}

pub fn stark_frequencies(l: &LaserParams, v: &InteractionParams) -> StarkFrequencies {
    let s = eig3_shengjin(l.rabi.norm(), l.detuning, v.v);
    if s.degenerate {
        return StarkFrequencies { c: [0.0; 3], degenerate: true };
    }
    let k = 2.0 * s.a / 3.0;
    StarkFrequencies {
        c: [k * s.theta.cos(), -k * (s.theta + FRAC_PI_3).cos(), -k * (s.theta - FRAC_PI_3).cos()],
        degenerate: false,
    }
}

/// `t_g 𝒞_χ / 2π` for each χ.
pub fn stark_cycles(l: &LaserParams, v: &InteractionParams, n: u32) -> Result<[f64; 3]> {
    let tg = gate_time(l, n)?;
    let s = stark_frequencies(l, v);
    Ok(s.c.map(|c| c * tg / TAU))
}

/// Nearest integers to the cycle counts, with M3 fixed by M1 + M2 + M3 = 0.
pub fn nearest_m(cycles: [f64; 3]) -> [i32; 3] {
    let m1 = cycles[0].round() as i32;
    let m2 = cycles[1].round() as i32;
    [m1, m2, -m1 - m2]
}

pub fn residuals_for(l: &LaserParams, v: &InteractionParams, n: u32, m: [i32; 3]) -> Result<[f64; 3]> {
    let c = stark_cycles(l, v, n)?;
    Ok([c[0] - m[0] as f64, c[1] - m[1] as f64, c[2] - m[2] as f64])
}

pub fn resonance_residuals(d: &GateDesignU1) -> [f64; 3] {
    residuals_for(&d.laser, &d.interaction, d.n, d.m).expect("design has a valid gate time")
}

/// `−(Δ + V/3) t_g`.
pub fn beta_angle(d: &GateDesignU1) -> f64 {
    -(d.laser.detuning + d.interaction.v / 3.0) * d.t_g
}

fn amplitude_11(l: &LaserParams, v: &InteractionParams, t: f64) -> Result<C64> {
    let es = eig_numeric(&h_v1(l, v))?;
    Ok(es.evolve(&basis_state(v1::DIM, v1::ONE_ONE), t)[v1::ONE_ONE])
}

fn amplitude_01(l: &LaserParams, t: f64) -> Result<C64> {
    let es = eig_numeric(&h_single(l))?;
    Ok(es.evolve(&basis_state(single::DIM, single::ZERO_ONE), t)[single::ZERO_ONE])
}

/// `1/4 − |⟨11| e^{−i t_g H_v1} |11⟩|² / 4`.
pub fn rotation_error_u1(d: &GateDesignU1) -> Result<f64> {
    // clamp the round-off that can push a perfect gate slightly negative
    Ok((0.25 - amplitude_11(&d.laser, &d.interaction, d.t_g)?.norm_sqr() / 4.0).max(0.0))
}

/// Trapezoid integral over `[0, t]` of Σ weight·population for a state
/// evolving under a fixed spectral decomposition.
pub(crate) fn weighted_occupation(
    es: &EigenSystem,
    psi0: &crate::qmath::StateVector,
    t: f64,
    dt: f64,
    weights: &[(usize, f64)],
) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let n = (t / dt).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let coeffs = es.vectors.ad_mul(psi0);
    let sample = |time: f64| {
        let mut ev = coeffs.clone();
        for (k, z) in ev.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -es.values[k] * time);
        }
        let psi = &es.vectors * ev;
        weights.iter().map(|&(i, w)| w * psi[i].norm_sqr()).sum::<f64>()
    };
    let mut acc = 0.5 * (sample(0.0) + sample(t));
    for k in 1..n {
        acc += sample(k as f64 * h);
    }
    acc * h
}

pub(crate) fn max_abs_eigenvalue(es: &EigenSystem) -> f64 {
    es.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `[2 T_r(01) + T_r(11) + 2 T_rr(11)] / 4` in seconds.
pub fn decay_error(d: &GateDesignU1) -> Result<f64> {
    let es1 = eig_numeric(&h_single(&d.laser))?;
    let es3 = eig_numeric(&h_v1(&d.laser, &d.interaction))?;
    let dt = default_dt(max_abs_eigenvalue(&es3).max(max_abs_eigenvalue(&es1)), d.t_g);
    let t01 = weighted_occupation(&es1, &basis_state(2, single::ZERO_ONE), d.t_g, dt, &[(single::ZERO_R, 1.0)]);
    let t11 = weighted_occupation(
        &es3,
        &basis_state(3, v1::ONE_ONE),
        d.t_g,
        dt,
        &[(v1::SYM, 1.0), (v1::RR, 2.0)],
    );
    Ok((2.0 * t01 + t11) / 4.0)
}

impl GateDesignU1 {
    /// Builds a design with M taken from the nearest integers.
    pub fn new(laser: LaserParams, interaction: InteractionParams, n: u32) -> Result<Self> {
        let m = nearest_m(stark_cycles(&laser, &interaction, n)?);
        Self::with_m(laser, interaction, n, m)
    }

    pub fn with_m(laser: LaserParams, interaction: InteractionParams, n: u32, m: [i32; 3]) -> Result<Self> {
        if m.iter().sum::<i32>() != 0 {
            return Err(Error::param("m", format!("{m:?} does not sum to zero")));
        }
        let t_g = gate_time(&laser, n)?;
        let mut d = GateDesignU1 {
            laser,
            interaction,
            n,
            m,
            t_g,
            alpha: alpha_angle(&laser, n),
            beta: 0.0,
            e_ro: 0.0,
            e_de_per_tau: 0.0,
        };
        d.beta = beta_angle(&d);
        d.e_ro = rotation_error_u1(&d)?;
        d.e_de_per_tau = decay_error(&d)?;
        Ok(d)
    }

    /// Convenience constructor in MHz (f/2π) with a real Rabi frequency.
    pub fn from_mhz(omega: f64, delta: f64, v: f64, n: u32) -> Result<Self> {
        Self::new(LaserParams::new(mhz(omega), mhz(delta)), InteractionParams::new(mhz(v)), n)
    }

    pub fn residuals(&self) -> [f64; 3] {
        resonance_residuals(self)
    }

    /// Phase of ⟨11|e^{−i t_g H_v1}|11⟩.
    pub fn beta_propagated(&self) -> Result<f64> {
        Ok(amplitude_11(&self.laser, &self.interaction, self.t_g)?.arg())
    }

    /// Phase of ⟨01|e^{−i t_g H}|01⟩.
    pub fn alpha_propagated(&self) -> Result<f64> {
        Ok(amplitude_01(&self.laser, self.t_g)?.arg())
    }

    /// Projected 4×4 action on the computational basis at time `t`.
    pub fn gate_matrix_at(&self, t: f64) -> Result<ComplexMatrix> {
        let a01 = amplitude_01(&self.laser, t)?;
        let a11 = amplitude_11(&self.laser, &self.interaction, t)?;
        let mut g = diag(&[C64::new(1.0, 0.0), a01, a01, a11]);
        // |00⟩ is uncoupled and the singly excited sectors never mix.
        g[(comp::S00, comp::S00)] = C64::new(1.0, 0.0);
        Ok(g)
    }

    pub fn gate_matrix(&self) -> Result<ComplexMatrix> {
        self.gate_matrix_at(self.t_g)
    }

    /// `diag(1, e^{iα}, e^{iα}, e^{iβ})` with the closed-form angles.
    pub fn target(&self) -> ComplexMatrix {
        let a = C64::from_polar(1.0, self.alpha);
        diag(&[C64::new(1.0, 0.0), a, a, C64::from_polar(1.0, self.beta)])
    }

    /// The mirror design with Δ and V negated.
    pub fn sign_flipped(&self) -> Result<Self> {
        let laser = LaserParams { detuning: -self.laser.detuning, ..self.laser };
        let interaction = InteractionParams { v: -self.interaction.v, ..self.interaction };
        Self::new(laser, interaction, self.n)
    }
}

/// `[x sin(y/x)]²` with `x = Ω/√(Ω²+δ²)`.
///
/// This is the exact two-level transfer when `y = Ωt/2`, i.e. half the Bloch
/// rotation angle of a resonant pulse of the same length.
pub fn leakage_estimate(omega: f64, delta: f64, y: f64) -> f64 {
    let r = omega.hypot(delta);
    if r == 0.0 {
        return 0.0;
    }
    let x = omega / r;
    if x == 0.0 {
        return 0.0;
    }
    (x * (y / x).sin()).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsU1 {
    pub max_e_ro: f64,
    /// Seconds (ns/τ × 1e−9).
    pub max_e_de: f64,
    /// Largest accepted |r_χ| in cycles after refinement.
    pub max_residual: f64,
}

impl Default for ThresholdsU1 {
    fn default() -> Self {
        ThresholdsU1 { max_e_ro: 1e-7, max_e_de: 90e-9, max_residual: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchU1 {
    pub omega: f64,
    pub delta_range: (f64, f64),
    pub v_range: (f64, f64),
    pub n_values: Vec<u32>,
    /// Grid spacing in both Δ and V, rad/s.
    pub grid_step: f64,
    /// Grid cells whose |r1|, |r2| exceed this (cycles) are not refined.
    pub screen: f64,
    pub thresholds: ThresholdsU1,
    pub mode: ExecMode,
}

impl SearchU1 {
    pub fn new(omega: f64, delta_range: (f64, f64), v_range: (f64, f64), n_max: u32) -> Self {
        SearchU1 {
            omega,
            delta_range,
            v_range,
            n_values: (1..=n_max).collect(),
            grid_step: mhz(0.05),
            screen: 0.1,
            thresholds: ThresholdsU1::default(),
            mode: ExecMode::default(),
        }
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(hi >= lo) || !(step > 0.0) {
        return Vec::new();
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

struct Refined {
    n: u32,
    m: [i32; 3],
    delta: f64,
    v: f64,
}

fn refine_cell(s: &SearchU1, n: u32, delta0: f64, v0: f64) -> Option<Refined> {
    let omega = s.omega;
    let cycles = stark_cycles(&LaserParams::new(omega, delta0), &InteractionParams::new(v0), n).ok()?;
    let m = nearest_m(cycles);
    if (cycles[0] - m[0] as f64).abs() > s.screen || (cycles[1] - m[1] as f64).abs() > s.screen {
        return None;
    }
    let unit = mhz(1.0);
    let objective = |p: &[f64]| {
        let l = LaserParams::new(omega, p[0] * unit);
        match residuals_for(&l, &InteractionParams::new(p[1] * unit), n, m) {
            Ok(r) => r[0] * r[0] + r[1] * r[1],
            Err(_) => f64::INFINITY,
        }
    };
    let step = 0.2 * s.grid_step / unit;
    let opts = NelderMeadOptions { max_iters: 3000, cost_tolerance: 1e-32, restarts: 2 };
    let (x, _) = nelder_mead(objective, &[delta0 / unit, v0 / unit], &[step, step], opts).ok()?;
    let (delta, v) = (x[0] * unit, x[1] * unit);
    let r = residuals_for(&LaserParams::new(omega, delta), &InteractionParams::new(v), n, m).ok()?;
    if r.iter().any(|x| x.abs() > s.thresholds.max_residual) {
        return None;
    }
    let pad = s.grid_step;
    let inside = |x: f64, (lo, hi): (f64, f64)| x >= lo - pad && x <= hi + pad;
    (inside(delta, s.delta_range) && inside(v, s.v_range)).then_some(Refined { n, m, delta, v })
}

/// Grid scan over (Δ, V) for each N, simplex refinement of r1² + r2², then
/// thresholds, deduplication by (N, M) and ordering by decay error.
pub fn search_u1(s: &SearchU1) -> Result<Vec<GateDesignU1>> {
    let deltas = axis(s.delta_range.0, s.delta_range.1, s.grid_step);
    let vs = axis(s.v_range.0, s.v_range.1, s.grid_step);
    let mut cells = Vec::with_capacity(deltas.len() * vs.len() * s.n_values.len());
    for &n in &s.n_values {
        for &d in &deltas {
            for &v in &vs {
                cells.push((n, d, v));
            }
        }
    }
    let refined = map_indexed(s.mode, cells.len(), |k| {
        let (n, d, v) = cells[k];
        refine_cell(s, n, d, v)
    });

    // Lowest rotation error per (N, M); computing E_ro is cheap, E_de is not.
    let mut best: BTreeMap<(u32, [i32; 3]), (f64, Refined)> = BTreeMap::new();
    for r in refined.into_iter().flatten() {
        let l = LaserParams::new(s.omega, r.delta);
        let iv = InteractionParams::new(r.v);
        let e_ro = 0.25 - amplitude_11(&l, &iv, gate_time(&l, r.n)?)?.norm_sqr() / 4.0;
        if e_ro > s.thresholds.max_e_ro {
            continue;
        }
        let key = (r.n, r.m);
        if best.get(&key).is_none_or(|(e, _)| e_ro < *e) {
            best.insert(key, (e_ro, r));
        }
    }

    let keyed: Vec<_> = best.into_values().collect();
    let designs = map_indexed(s.mode, keyed.len(), |k| {
        let r = &keyed[k].1;
        GateDesignU1::with_m(LaserParams::new(s.omega, r.delta), InteractionParams::new(r.v), r.n, r.m)
    });
    let mut out = Vec::new();
    for d in designs {
        let d = d?;
        if d.e_de_per_tau <= s.thresholds.max_e_de {
            out.push(d);
        }
    }
    out.sort_by(|a, b| {
        a.e_de_per_tau.total_cmp(&b.e_de_per_tau).then(a.n.cmp(&b.n)).then(a.m.cmp(&b.m))
    });
    Ok(out)
}
