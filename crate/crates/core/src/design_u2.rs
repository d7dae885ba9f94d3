//! Two-pulse gate with individual addressing,
//! `U₂ = diag(1, e^{iφ01}, e^{iφ10}, e^{iβ})`, and its parameter search.
//!
//! The control pulse lasts `t_c`, the target pulse `t_t`. `|01⟩` only sees the
//! target laser and picks up the target-formula angle `gamma`; `|10⟩` only
//! sees the control laser and picks up `alpha`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{comp, single, v2};
use crate::design_u1::{max_abs_eigenvalue, weighted_occupation};
use crate::error::{Error, Result};
use crate::model::{h_single, h_v2, h_vc, h_vt, InteractionParams, LaserParams};
use crate::par::{map_indexed, ExecMode};
use crate::qmath::{
    basis_state, default_dt, diag, eig_numeric, nelder_mead, ComplexMatrix, NelderMeadOptions, StateVector, C64,
};
use crate::rng::{stream, Channel};
use crate::units::{angle_diff, mhz};

/// `1 − (|Tr(U†W)|² + Tr(U†W W†U)) / 20` for 4×4 matrices.
pub fn pedersen_error(target: &ComplexMatrix, actual: &ComplexMatrix) -> Result<f64> {
    for m in [target, actual] {
        if m.nrows() != 4 || m.ncols() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: m.nrows().max(m.ncols()) });
        }
    }
    let m = target.adjoint() * actual;
    let tr = m.trace();
    let tr2 = (&m * m.adjoint()).trace();
    Ok(1.0 - (tr.norm_sqr() + tr2.re) / 20.0)
}

/// `(α, γ)`: `α/π = −N_c(1 + Δ_c/Ω̄_c)`, `γ/π = −N_t(1 + Δ_t/Ω̄_t)`.
pub fn u2_angles(lc: &LaserParams, lt: &LaserParams, nc: u32, nt: u32) -> (f64, f64) {
    (crate::design_u1::alpha_angle(lc, nc), crate::design_u1::alpha_angle(lt, nt))
}

/// Outcome of evolving `|11⟩` through the two pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct Staged11 {
    pub amplitude: C64,
    /// |⟨rr|ψ⟩|² when the shorter pulse ends.
    pub p_rr: f64,
    /// Population of the singly excited state of the shorter-pulse atom
    /// (|r1⟩ when the control pulse is shorter) when that pulse ends.
    pub p_single: f64,
    /// Final state in {|rr⟩, |r1⟩, |1r⟩, |11⟩}.
    pub state: StateVector,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    control: bool,
    target: bool,
}

fn segments(t_c: f64, t_t: f64, start_c: f64, start_t: f64) -> Vec<Segment> {
    let mut cuts = vec![start_c, start_c + t_c, start_t, start_t + t_t];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
    cuts.windows(2)
        .filter(|w| w[1] - w[0] > 0.0)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            Segment {
                start: w[0],
                end: w[1],
                control: mid > start_c && mid < start_c + t_c,
                target: mid > start_t && mid < start_t + t_t,
            }
        })
        .collect()
}

fn segment_hamiltonian(s: &Segment, lc: &LaserParams, lt: &LaserParams, v: &InteractionParams) -> ComplexMatrix {
    match (s.control, s.target) {
        (true, true) => h_v2(lc, lt, v),
        (false, true) => h_vt(lt, v),
        (true, false) => h_vc(lc, v),
        (false, false) => ComplexMatrix::zeros(v2::DIM, v2::DIM),
    }
}

/// Staged evolution of `|11⟩` with the shorter pulse starting `offset`
/// seconds after the longer one (0 aligns the pulse starts).
pub fn evolve_11_staged_offset(
    lc: &LaserParams,
    lt: &LaserParams,
    v: &InteractionParams,
    t_c: f64,
    t_t: f64,
    offset: f64,
) -> Result<Staged11> {
    let (start_c, start_t) = if t_c <= t_t { (offset, 0.0) } else { (0.0, offset) };
    let short_end = if t_c <= t_t { start_c + t_c } else { start_t + t_t };
    let single_idx = if t_c <= t_t { v2::R_ONE } else { v2::ONE_R };
    let mut psi = basis_state(v2::DIM, v2::ONE_ONE);
    let (mut p_rr, mut p_single) = (0.0, 0.0);
    for s in segments(t_c, t_t, start_c, start_t) {
        let es = eig_numeric(&segment_hamiltonian(&s, lc, lt, v))?;
        psi = es.evolve(&psi, s.end - s.start);
        if (s.end - short_end).abs() <= 1e-12 * short_end.max(1e-30) {
            p_rr = psi[v2::RR].norm_sqr();
            p_single = psi[single_idx].norm_sqr();
        }
    }
    Ok(Staged11 { amplitude: psi[v2::ONE_ONE], p_rr, p_single, state: psi })
}

pub fn evolve_11_staged(d: &GateDesignU2) -> Result<Staged11> {
    evolve_11_staged_offset(&d.lc, &d.lt, &d.interaction, d.t_c, d.t_t, 0.0)
}

/// `arg⟨11|ψ(end)⟩` with a flag that is false when |amplitude| < 0.9.
pub fn beta_u2(d: &GateDesignU2) -> Result<(f64, bool)> {
    let s = evolve_11_staged(d)?;
    Ok((s.amplitude.arg(), s.amplitude.norm() >= 0.9))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDesignU2 {
    pub lc: LaserParams,
    pub lt: LaserParams,
    pub interaction: InteractionParams,
    pub nc: u32,
    pub nt: u32,
    pub t_c: f64,
    pub t_t: f64,
    /// Control-formula angle, the phase of `|10⟩`.
    pub alpha: f64,
    /// Target-formula angle, the phase of `|01⟩`.
    pub gamma: f64,
    /// Propagated phase of `|11⟩`.
    pub beta: f64,
    /// False when the `|11⟩` amplitude is below 0.9 and `beta` is unreliable.
    pub beta_reliable: bool,
    /// +1 or −1: the sign of β − α − γ ≈ ±π/2 the design is scored against.
    pub sign: i8,
    pub e_ro: f64,
    pub e_de_per_tau: f64,
}

impl GateDesignU2 {
    /// Builds a design, scoring against the nearer of ±π/2.
    pub fn new(lc: LaserParams, lt: LaserParams, interaction: InteractionParams, nc: u32, nt: u32) -> Result<Self> {
        Self::build(lc, lt, interaction, nc, nt, None)
    }

    pub fn with_sign(
        lc: LaserParams,
        lt: LaserParams,
        interaction: InteractionParams,
        nc: u32,
        nt: u32,
        sign: i8,
    ) -> Result<Self> {
        Self::build(lc, lt, interaction, nc, nt, Some(sign))
    }

    fn build(
        lc: LaserParams,
        lt: LaserParams,
        interaction: InteractionParams,
        nc: u32,
        nt: u32,
        sign: Option<i8>,
    ) -> Result<Self> {
        let t_c = crate::design_u1::gate_time(&lc, nc)?;
        let t_t = crate::design_u1::gate_time(&lt, nt)?;
        let (alpha, gamma) = u2_angles(&lc, &lt, nc, nt);
        let staged = evolve_11_staged_offset(&lc, &lt, &interaction, t_c, t_t, 0.0)?;
        let beta = staged.amplitude.arg();
        let sign = sign.unwrap_or_else(|| if angle_diff(beta - alpha - gamma, FRAC_PI_2).abs() <= FRAC_PI_2 { 1 } else { -1 });
        let mut d = GateDesignU2 {
            lc,
            lt,
            interaction,
            nc,
            nt,
            t_c,
            t_t,
            alpha,
            gamma,
            beta,
            beta_reliable: staged.amplitude.norm() >= 0.9,
            sign,
            e_ro: 0.0,
            e_de_per_tau: 0.0,
        };
        d.e_ro = pedersen_error(&d.target(), &d.gate_matrix()?)?;
        d.e_de_per_tau = decay_error(&d)?;
        Ok(d)
    }

    /// Convenience constructor in MHz (f/2π) with real Rabi frequencies.
    pub fn from_mhz(oc: f64, dc: f64, ot: f64, dt: f64, v: f64, nc: u32, nt: u32) -> Result<Self> {
        Self::new(
            LaserParams::new(mhz(oc), mhz(dc)),
            LaserParams::new(mhz(ot), mhz(dt)),
            InteractionParams::new(mhz(v)),
            nc,
            nt,
        )
    }

    /// `diag(1, e^{iγ}, e^{iα}, e^{i(α+γ±π/2)})`.
    pub fn target(&self) -> ComplexMatrix {
        let b = self.alpha + self.gamma + self.sign as f64 * FRAC_PI_2;
        diag(&[
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, self.gamma),
            C64::from_polar(1.0, self.alpha),
            C64::from_polar(1.0, b),
        ])
    }

    /// Projected action on the computational basis with aligned pulse starts.
    pub fn gate_matrix(&self) -> Result<ComplexMatrix> {
        self.gate_matrix_offset(0.0)
    }

    pub fn gate_matrix_offset(&self, offset: f64) -> Result<ComplexMatrix> {
        let one = basis_state(single::DIM, single::ZERO_ONE);
        let a01 = eig_numeric(&h_single(&self.lt))?.evolve(&one, self.t_t)[single::ZERO_ONE];
        let a10 = eig_numeric(&h_single(&self.lc))?.evolve(&one, self.t_c)[single::ZERO_ONE];
        let s = evolve_11_staged_offset(&self.lc, &self.lt, &self.interaction, self.t_c, self.t_t, offset)?;
        let mut g = diag(&[C64::new(1.0, 0.0), a01, a10, s.amplitude]);
        g[(comp::S00, comp::S00)] = C64::new(1.0, 0.0);
        Ok(g)
    }

    /// β − α − γ reduced to (−π, π].
    pub fn entangling_angle(&self) -> f64 {
        angle_diff(self.beta - self.alpha - self.gamma, 0.0)
    }

    pub fn residual_populations(&self) -> Result<(f64, f64)> {
        let s = evolve_11_staged(self)?;
        Ok((s.p_rr, s.p_single))
    }

    /// Same gate with (Δ_c, Δ_t, V) negated.
    pub fn sign_flipped(&self) -> Result<Self> {
        let flip = |l: &LaserParams| LaserParams { detuning: -l.detuning, ..*l };
        Self::new(
            flip(&self.lc),
            flip(&self.lt),
            InteractionParams { v: -self.interaction.v, ..self.interaction },
            self.nc,
            self.nt,
        )
    }
}

/// `[T_r(01) + T_r(10) + T_r(11) + 2 T_rr(11)] / 4` in seconds.
pub fn decay_error(d: &GateDesignU2) -> Result<f64> {
    let one = basis_state(single::DIM, single::ZERO_ONE);
    let es_t = eig_numeric(&h_single(&d.lt))?;
    let es_c = eig_numeric(&h_single(&d.lc))?;
    let t_end = d.t_c.max(d.t_t);
    let scale = max_abs_eigenvalue(&eig_numeric(&h_v2(&d.lc, &d.lt, &d.interaction))?);
    let dt = default_dt(scale, t_end);
    let t01 = weighted_occupation(&es_t, &one, d.t_t, dt, &[(single::ZERO_R, 1.0)]);
    let t10 = weighted_occupation(&es_c, &one, d.t_c, dt, &[(single::ZERO_R, 1.0)]);
    let (start_c, start_t) = (0.0, 0.0);
    let weights = [(v2::R_ONE, 1.0), (v2::ONE_R, 1.0), (v2::RR, 2.0)];
    let mut psi = basis_state(v2::DIM, v2::ONE_ONE);
    let mut t11 = 0.0;
    for s in segments(d.t_c, d.t_t, start_c, start_t) {
        let es = eig_numeric(&segment_hamiltonian(&s, &d.lc, &d.lt, &d.interaction))?;
        let span = s.end - s.start;
        t11 += weighted_occupation(&es, &psi, span, dt, &weights);
        psi = es.evolve(&psi, span);
    }
    Ok((t01 + t10 + t11) / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveU2 {
    /// Rotation error against `diag(1, e^{iγ}, e^{iα}, e^{i(α+γ±π/2)})`.
    Pedersen,
    /// (p_rr + p_r1) + (1 − |amp|²) + 10·(angle mismatch in cycles)².
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsU2 {
    pub max_e_ro: f64,
    /// Seconds.
    pub max_e_de: f64,
}

impl Default for ThresholdsU2 {
    fn default() -> Self {
        ThresholdsU2 { max_e_ro: 1e-5, max_e_de: 150e-9 }
    }
}

/// Multi-start simplex search over (|Ω_c|, Δ_c, Δ_t, V) with |Ω_t| at the cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchU2 {
    /// |Ω_t|, also the upper bound for |Ω_c|; rad/s.
    pub omega_cap: f64,
    pub n_pairs: Vec<(u32, u32)>,
    /// Start centre (|Ω_c|, Δ_c, Δ_t, V), rad/s.
    pub center: [f64; 4],
    /// Half-width of the random start box per coordinate, rad/s.
    pub spread: [f64; 4],
    pub n_starts: usize,
    pub seed: u64,
    /// Requested sign of β − α − γ ≈ ±π/2.
    pub sign: i8,
    pub objective: ObjectiveU2,
    pub thresholds: ThresholdsU2,
    pub mode: ExecMode,
}

impl SearchU2 {
    pub fn near(center: [f64; 4], omega_cap: f64, nc: u32, nt: u32, sign: i8) -> Self {
        SearchU2 {
            omega_cap,
            n_pairs: vec![(nc, nt)],
            center,
            spread: [mhz(0.02); 4],
            n_starts: 8,
            seed: 1,
            sign,
            objective: ObjectiveU2::Pedersen,
            thresholds: ThresholdsU2::default(),
            mode: ExecMode::default(),
        }
    }
}

fn objective_u2(s: &SearchU2, nc: u32, nt: u32, p: &[f64]) -> f64 {
    let unit = mhz(1.0);
    let (oc, dc, dt, v) = (p[0] * unit, p[1] * unit, p[2] * unit, p[3] * unit);
    if oc <= 0.0 || oc > s.omega_cap {
        return 1e3;
    }
    let lc = LaserParams::new(oc, dc);
    let lt = LaserParams::new(s.omega_cap, dt);
    let iv = InteractionParams::new(v);
    let (Ok(t_c), Ok(t_t)) = (crate::design_u1::gate_time(&lc, nc), crate::design_u1::gate_time(&lt, nt)) else {
        return 1e3;
    };
    let Ok(st) = evolve_11_staged_offset(&lc, &lt, &iv, t_c, t_t, 0.0) else {
        return 1e3;
    };
    let (alpha, gamma) = u2_angles(&lc, &lt, nc, nt);
    let want = alpha + gamma + s.sign as f64 * FRAC_PI_2;
    match s.objective {
        ObjectiveU2::Pedersen => {
            let eps = st.amplitude.norm();
            let z = st.amplitude * C64::from_polar(1.0, -want) + 3.0;
            1.0 - (z.norm_sqr() + 3.0 + eps * eps) / 20.0
        }
        ObjectiveU2::Weighted => {
            let mismatch = angle_diff(st.amplitude.arg(), want) / TAU;
            st.p_rr + st.p_single + (1.0 - st.amplitude.norm_sqr()) + 10.0 * mismatch * mismatch
        }
    }
}

pub fn search_u2(s: &SearchU2) -> Result<Vec<GateDesignU2>> {
    if s.sign != 1 && s.sign != -1 {
        return Err(Error::param("sign", "must be +1 or -1"));
    }
    let unit = mhz(1.0);
    let mut jobs = Vec::new();
    for &(nc, nt) in &s.n_pairs {
        for k in 0..s.n_starts {
            jobs.push((nc, nt, k));
        }
    }
    let results = map_indexed(s.mode, jobs.len(), |j| {
        let (nc, nt, k) = jobs[j];
        let mut x0 = s.center.map(|c| c / unit);
        if k > 0 {
            let mut rng = stream(s.seed, j as u64, Channel::Search);
            for (i, x) in x0.iter_mut().enumerate() {
                let w = s.spread[i] / unit;
                *x += rng.random_range(-w..=w);
            }
        }
        let steps = s.spread.map(|w| (w / unit).max(1e-3));
        let opts = NelderMeadOptions { max_iters: 4000, cost_tolerance: 1e-24, restarts: 3 };
        nelder_mead(|p| objective_u2(s, nc, nt, p), &x0, &steps, opts).ok().map(|(x, _)| (nc, nt, x))
    });

    let mut best: BTreeMap<(u32, u32, [i64; 4]), GateDesignU2> = BTreeMap::new();
    for (nc, nt, x) in results.into_iter().flatten() {
        let lc = LaserParams::new(x[0] * unit, x[1] * unit);
        let lt = LaserParams::new(s.omega_cap, x[2] * unit);
        let d = GateDesignU2::with_sign(lc, lt, InteractionParams::new(x[3] * unit), nc, nt, s.sign)?;
        if d.e_ro > s.thresholds.max_e_ro || d.e_de_per_tau > s.thresholds.max_e_de {
            continue;
        }
        let key = (nc, nt, [x[0], x[1], x[2], x[3]].map(|v| (v * 1e4).round() as i64));
        if best.get(&key).is_none_or(|b| d.e_ro < b.e_ro) {
            best.insert(key, d);
        }
    }
    let mut out: Vec<_> = best.into_values().collect();
    out.sort_by(|a, b| a.e_ro.total_cmp(&b.e_ro).then(a.e_de_per_tau.total_cmp(&b.e_de_per_tau)));
    Ok(out)
}

/// Reduces an unreduced β − α − γ (in units of π) to ±1/2.
pub fn reduce_half_pi(x_over_pi: f64) -> f64 {
    angle_diff(x_over_pi * PI, 0.0) / PI
}
