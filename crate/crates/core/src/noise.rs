//! Gate errors of the single-pulse gate under atomic motion, laser phase
//! noise, finite pulse edges, leakage to nearby Rydberg levels and Rydberg
//! decay.
//!
//! Positions are in µm, velocities in µm/s and wavevectors in rad/µm; every
//! other quantity follows the crate-wide SI convention. The lasers propagate
//! along x and the qubits sit on the z axis at `(0,0,0)` and `(0,0,L)`.
//!
//! Each per-atom level set splits into sectors {0, s}, {1, r, d} and {a}
//! that the Hamiltonian never mixes, so the 36-level pair space is a direct
//! sum of nine blocks (at most 9×9) and every step exponentiates blocks only.
//! Decay to `|a⟩` is the only process that moves a state between blocks.

use std::f64::consts::{PI, SQRT_2, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::{pair, Level, COMPUTATIONAL, LEVELS, PAIR_DIM};
use crate::design_u1::GateDesignU1;
use crate::design_u2::pedersen_error;
use crate::error::{Error, Result};
use crate::model::{h_leak_two_atom, h_single, h_v1, InteractionParams, LaserParams, LeakageSpec};
use crate::par::{map_indexed, ExecMode};
use crate::qmath::{
    basis_state, diag, eig_numeric, golden_section, propagate_steps, propagator, ComplexMatrix, StateVector, C64,
};
use crate::rng::{stream, Channel, StreamRng};
use crate::units::{ghz, mhz, ns, to_ns, K_B, RB87_MASS};

/// Optical tweezer holding each qubit before and after the gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub waist_um: f64,
    pub wavelength_um: f64,
    /// Trap depth U/k_B in kelvin.
    pub depth_k: f64,
}

impl Default for TrapConfig {
    fn default() -> Self {
        TrapConfig { waist_um: 3.0, wavelength_um: 1.1, depth_k: 20e-3 }
    }
}

impl TrapConfig {
    /// ξ = √2 π w / λ.
    pub fn xi(&self) -> f64 {
        SQRT_2 * PI * self.waist_um / self.wavelength_um
    }

    /// (σ_x, σ_y, σ_z) in µm with σ_y = σ_z = (w/2)√(T_a/U) and σ_x = ξσ_y.
    pub fn sigmas(&self, t_a: f64) -> [f64; 3] {
        let sy = 0.5 * self.waist_um * (t_a.max(0.0) / self.depth_k).sqrt();
        [self.xi() * sy, sy, sy]
    }
}

/// √(k_B T / m) for ⁸⁷Rb, in µm/s.
pub fn thermal_speed(t_a: f64) -> f64 {
    (K_B * t_a.max(0.0) / RB87_MASS).sqrt() * 1e6
}

/// Independent Gaussian displacements about `(0,0,0)` and `(0,0,L)`.
pub fn sample_positions(trap: &TrapConfig, t_a: f64, spacing_um: f64, rng: &mut StreamRng) -> ([f64; 3], [f64; 3]) {
    let s = trap.sigmas(t_a);
    let mut draw = |centre: [f64; 3]| -> [f64; 3] {
        std::array::from_fn(|k| {
            if s[k] > 0.0 {
                centre[k] + Normal::new(0.0, s[k]).expect("finite sigma").sample(rng)
            } else {
                centre[k]
            }
        })
    };
    let rc = draw([0.0; 3]);
    let rt = draw([0.0, 0.0, spacing_um]);
    (rc, rt)
}

/// Worst-case drift directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    /// Both atoms at rest.
    Static,
    /// (±v, ±v) along the beam axis x: four branches.
    DopplerMax,
    /// (v, −v) and (−v, v) along the separation axis z: approach and depart.
    VdwMax,
    /// The four Doppler branches followed by the two vdW branches.
    AllSix,
}

impl DriftMode {
    /// Unit drift directions (control, target) per branch.
    pub fn branches(self) -> Vec<([f64; 3], [f64; 3])> {
        let x = |s: f64| [s, 0.0, 0.0];
        let z = |s: f64| [0.0, 0.0, s];
        let doppler = vec![(x(1.0), x(1.0)), (x(1.0), x(-1.0)), (x(-1.0), x(1.0)), (x(-1.0), x(-1.0))];
        let vdw = vec![(z(1.0), z(-1.0)), (z(-1.0), z(1.0))];
        match self {
            DriftMode::Static => vec![([0.0; 3], [0.0; 3])],
            DriftMode::DopplerMax => doppler,
            DriftMode::VdwMax => vdw,
            DriftMode::AllSix => doppler.into_iter().chain(vdw).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DriftMode::Static => "static",
            DriftMode::DopplerMax => "doppler_max",
            DriftMode::VdwMax => "vdw_max",
            DriftMode::AllSix => "all_six",
        }
    }
}

/// Tabulated phase-noise spectral density S_ν(f) in Hz²/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoiseSpec {
    freqs_hz: Vec<f64>,
    s_nu: Vec<f64>,
}

impl PhaseNoiseSpec {
    pub fn new(freqs_hz: Vec<f64>, s_nu: Vec<f64>) -> Result<Self> {
        if freqs_hz.len() != s_nu.len() {
            return Err(Error::DimensionMismatch { expected: freqs_hz.len(), got: s_nu.len() });
        }
        if let Some(f) = freqs_hz.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::param("freqs_hz", format!("frequencies must be positive, got {f}")));
        }
        if let Some(s) = s_nu.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::param("s_nu", format!("spectral density must be non-negative, got {s}")));
        }
        Ok(PhaseNoiseSpec { freqs_hz, s_nu })
    }

    /// {3, 15, 25, 45, 70, 70, 10, 4}×100 Hz²/Hz at {0.1, 0.3, 0.5, 0.7, 0.9, 1, 1.1, 1.2} MHz.
    pub fn enhanced() -> Self {
        let f = [0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.1, 1.2].map(|x| x * 1e6);
        let s = [3.0, 15.0, 25.0, 45.0, 70.0, 70.0, 10.0, 4.0].map(|x| x * 100.0);
        PhaseNoiseSpec { freqs_hz: f.to_vec(), s_nu: s.to_vec() }
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn s_nu(&self) -> &[f64] {
        &self.s_nu
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    /// Mean of φ² over uniformly random φ_f: Σ 2S_ν(f)/(f² t_g).
    pub fn mean_square(&self, t_g: f64) -> f64 {
        self.freqs_hz.iter().zip(&self.s_nu).map(|(f, s)| 2.0 * s / (f * f * t_g)).sum()
    }

    pub fn random_phases(&self, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.len()).map(|_| rng.random_range(0.0..TAU)).collect()
    }
}

/// φ(t) = 2 Σ_f √(S_ν(f)/t_g) cos(2πft + φ_f) / f.
pub fn phase_noise_waveform(t: f64, spec: &PhaseNoiseSpec, phases: &[f64], t_g: f64) -> Result<f64> {
    if phases.len() != spec.len() {
        return Err(Error::DimensionMismatch { expected: spec.len(), got: phases.len() });
    }
    Ok(noise_sum(t, spec, phases, t_g))
}

fn noise_sum(t: f64, spec: &PhaseNoiseSpec, phases: &[f64], t_g: f64) -> f64 {
    spec.freqs_hz
        .iter()
        .zip(&spec.s_nu)
        .zip(phases)
        .map(|((f, s), p)| 2.0 * (s / t_g).sqrt() * (TAU * f * t + p).cos() / f)
        .sum()
}

/// Counter-propagating excitation beams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beams {
    pub lambda1_um: f64,
    pub lambda2_um: f64,
    /// Waist radius of both beams, µm.
    pub radius_um: f64,
}

impl Default for Beams {
    fn default() -> Self {
        Beams { lambda1_um: 0.795, lambda2_um: 0.474, radius_um: 10.0 }
    }
}

impl Beams {
    /// k₁ − k₂ in rad/µm.
    pub fn k_eff(&self) -> f64 {
        TAU * (1.0 / self.lambda1_um - 1.0 / self.lambda2_um)
    }
}

/// (k₁ − k₂)(x₀ + v t).
pub fn doppler_phase(t: f64, k_eff: f64, x0_um: f64, v_um_per_s: f64) -> f64 {
    k_eff * (x0_um + v_um_per_s * t)
}

/// Trapezoid envelope with linear ramps of length `t_edge` at both ends.
pub fn pulse_envelope(t: f64, t_g: f64, t_edge: f64) -> Result<f64> {
    if t_edge < 0.0 || 2.0 * t_edge > t_g {
        return Err(Error::param("t_edge", format!("need 0 ≤ 2·t_edge ≤ t_g, got t_edge={t_edge}, t_g={t_g}")));
    }
    Ok(envelope(t, t_g, t_edge))
}

fn envelope(t: f64, t_g: f64, t_edge: f64) -> f64 {
    if t < 0.0 || t > t_g {
        0.0
    } else if t_edge == 0.0 {
        1.0
    } else {
        (t / t_edge).min((t_g - t) / t_edge).min(1.0)
    }
}

/// Result of tuning the pulse duration for a given edge length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseOptimum {
    pub t_op: f64,
    /// Average population loss over the four inputs at `t_op`.
    pub loss: f64,
    /// The same loss at the design duration t_g.
    pub loss_at_tg: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn ramped(h: &dyn Fn(f64) -> ComplexMatrix, psi: &StateVector, duration: f64, edge: f64) -> Result<StateVector> {
    if edge == 0.0 {
        return Ok(propagator(&h(1.0), duration)? * psi);
    }
    let dt = edge / 400.0;
    let up = propagate_steps(|t| h(t / edge), psi, 0.0, edge, dt)?;
    let flat = propagator(&h(1.0), duration - 2.0 * edge)? * up;
    propagate_steps(|t| h((duration - t) / edge), &flat, duration - edge, duration, dt)
}

/// Average population loss of the trapezoid pulse and the `|01⟩`, `|11⟩`
/// amplitudes it leaves.
pub fn pulse_loss(design: &GateDesignU1, duration: f64, t_edge: f64) -> Result<(f64, C64, C64)> {
    if t_edge < 0.0 || 2.0 * t_edge > duration {
        return Err(Error::param("t_edge", "need 0 ≤ 2·t_edge ≤ duration"));
    }
    let scaled = |s: f64| LaserParams { rabi: design.laser.rabi * s, ..design.laser };
    let h2 = |s: f64| h_single(&scaled(s));
    let h3 = |s: f64| h_v1(&scaled(s), &design.interaction);
    let a = ramped(&h2, &basis_state(2, crate::basis::single::ZERO_ONE), duration, t_edge)?;
    let b = ramped(&h3, &basis_state(3, crate::basis::v1::ONE_ONE), duration, t_edge)?;
    let a01 = a[crate::basis::single::ZERO_ONE];
    let a11 = b[crate::basis::v1::ONE_ONE];
    let loss = (2.0 * (1.0 - a01.norm_sqr()) + (1.0 - a11.norm_sqr())) / 4.0;
    Ok((loss, a01, a11))
}

/// Golden-section search on the duration, starting from t_g, for the pulse
/// with edges of length `t_edge`.
pub fn optimize_pulse_duration(design: &GateDesignU1, t_edge: f64) -> Result<PulseOptimum> {
    let (loss_at_tg, a01, a11) = pulse_loss(design, design.t_g, t_edge)?;
    if t_edge == 0.0 {
        return Ok(PulseOptimum { t_op: design.t_g, loss: loss_at_tg, loss_at_tg, alpha: a01.arg(), beta: a11.arg() });
    }
    let tg_ns = to_ns(design.t_g);
    let edge_ns = to_ns(t_edge);
    let f = |t_ns: f64| pulse_loss(design, ns(t_ns), t_edge).map(|r| r.0).unwrap_or(f64::INFINITY);
    let (t_ns, _) = golden_section(f, tg_ns - edge_ns, tg_ns + 3.0 * edge_ns, tg_ns, 1e-12)?;
    let t_op = ns(t_ns);
    let (loss, a01, a11) = pulse_loss(design, t_op, t_edge)?;
    Ok(PulseOptimum { t_op, loss, loss_at_tg, alpha: a01.arg(), beta: a11.arg() })
}

/// How the leakage couplings are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LeakModel {
    None,
    /// Ω_d = 2Ω, Ω_s = 0.84Ω, δ_d = 2π·1.6 GHz, δ_s = 2π·520 MHz.
    Reference,
    Custom(LeakageSpec),
}

impl LeakModel {
    pub fn resolve(&self, omega: f64) -> LeakageSpec {
        match self {
            LeakModel::None => LeakageSpec::default(),
            LeakModel::Reference => reference_leak(omega),
            LeakModel::Custom(l) => *l,
        }
    }
}

pub fn reference_leak(omega: f64) -> LeakageSpec {
    LeakageSpec { omega_d: 2.0 * omega, omega_s: 0.84 * omega, delta_d: ghz(1.6), delta_s: mhz(520.0) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seconds")]
pub enum DurationRule {
    /// The design's t_g.
    Design,
    /// t_g re-tuned for the pulse edges.
    Optimized,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionMode {
    /// Atoms exactly at the trap centres.
    Centers,
    /// Gaussian Monte-Carlo sampling of both atoms.
    MonteCarlo,
    /// Control atom at x ∈ {−σ_x, 0, σ_x} with Gaussian weights, target at its centre.
    ThreePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    /// Steps across the flat top of the pulse.
    pub flat: usize,
    /// Steps across each ramp.
    pub edge: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { flat: 400, edge: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseScenario {
    pub trap: TrapConfig,
    /// Atomic temperature T_a, K.
    pub temperature: f64,
    pub drift_mode: DriftMode,
    /// Rydberg lifetime τ, s; `None` switches decay off.
    pub lifetime: Option<f64>,
    pub beams: Beams,
    pub phase_noise: Option<PhaseNoiseSpec>,
    /// Ramp length T_edge, s.
    pub edge: f64,
    pub duration: DurationRule,
    pub leak: LeakModel,
    /// rad/s·µm⁶; `None` uses V·L⁶ so the nominal geometry reproduces the design V.
    pub c6: Option<f64>,
    pub spacing_um: f64,
    pub positions: PositionMode,
    pub steps: StepConfig,
    pub seed: u64,
}

impl Default for NoiseScenario {
    fn default() -> Self {
        NoiseScenario {
            trap: TrapConfig::default(),
            temperature: 0.0,
            drift_mode: DriftMode::Static,
            lifetime: None,
            beams: Beams::default(),
            phase_noise: None,
            edge: 0.0,
            duration: DurationRule::Design,
            leak: LeakModel::None,
            c6: None,
            spacing_um: 16.5,
            positions: PositionMode::Centers,
            steps: StepConfig::default(),
            seed: 1,
        }
    }
}

impl NoiseScenario {
    /// 1.2 ms lifetime, 20 ns edges with the re-tuned duration, leakage on.
    pub fn table3() -> Self {
        NoiseScenario {
            lifetime: Some(1.2e-3),
            edge: ns(20.0),
            duration: DurationRule::Optimized,
            leak: LeakModel::Reference,
            ..NoiseScenario::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) {
            return Err(Error::param("temperature", "must be non-negative"));
        }
        if let Some(t) = self.lifetime {
            if !(t > 0.0) {
                return Err(Error::param("lifetime", "must be positive"));
            }
        }
        if !(self.spacing_um > 0.0) {
            return Err(Error::param("spacing_um", "must be positive"));
        }
        if self.steps.flat == 0 || (self.edge > 0.0 && self.steps.edge == 0) {
            return Err(Error::param("steps", "step counts must be positive"));
        }
        Ok(())
    }

    fn c6_for(&self, design: &GateDesignU1) -> f64 {
        self.c6.unwrap_or(design.interaction.v * self.spacing_um.powi(6))
    }
}

/// Initial positions, drift velocities and phase-noise phases of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub rc: [f64; 3],
    pub rt: [f64; 3],
    pub vc: [f64; 3],
    pub vt: [f64; 3],
    pub phases: Option<Vec<f64>>,
}

impl Realization {
    pub fn nominal(spacing_um: f64) -> Self {
        Realization { rc: [0.0; 3], rt: [0.0, 0.0, spacing_um], vc: [0.0; 3], vt: [0.0; 3], phases: None }
    }
}

/// Resolves the duration rule.
pub fn gate_duration(scenario: &NoiseScenario, design: &GateDesignU1) -> Result<f64> {
    match scenario.duration {
        DurationRule::Design => Ok(design.t_g),
        DurationRule::Fixed(t) => Ok(t),
        DurationRule::Optimized => Ok(optimize_pulse_duration(design, scenario.edge)?.t_op),
    }
}

const SECTORS: [&[Level]; 3] = [&[Level::Zero, Level::S], &[Level::One, Level::R, Level::D], &[Level::A]];

/// Block holding each computational input.
const INPUT_BLOCK: [usize; 4] = [0, 1, 3, 4];

fn block_indices() -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(9);
    for sc in SECTORS {
        for st in SECTORS {
            out.push(sc.iter().flat_map(|&c| st.iter().map(move |&t| pair(c, t))).collect());
        }
    }
    out
}

fn rydberg_count(i: usize) -> f64 {
    let (c, t) = (LEVELS[i / 6], LEVELS[i % 6]);
    c.is_rydberg() as u8 as f64 + t.is_rydberg() as u8 as f64
}

/// Midpoints and widths of the integration steps.
fn time_grid(duration: f64, edge: f64, steps: StepConfig, max_dt: f64) -> Vec<(f64, f64)> {
    let mut segs = Vec::new();
    if edge > 0.0 {
        segs.push((0.0, edge, steps.edge));
        segs.push((edge, duration - edge, steps.flat));
        segs.push((duration - edge, duration, steps.edge));
    } else {
        segs.push((0.0, duration, steps.flat));
    }
    let mut grid = Vec::new();
    for (a, b, n) in segs {
        if b <= a {
            continue;
        }
        let n = n.max(((b - a) / max_dt).ceil() as usize).max(1);
        let h = (b - a) / n as f64;
        grid.extend((0..n).map(|k| (a + (k as f64 + 0.5) * h, h)));
    }
    grid
}

/// Time-dependent two-atom Hamiltonian for one realization.
struct Drive<'a> {
    design: &'a GateDesignU1,
    real: &'a Realization,
    leak: LeakageSpec,
    noise: Option<&'a PhaseNoiseSpec>,
    c6: f64,
    k_eff: f64,
    duration: f64,
    edge: f64,
}

impl Drive<'_> {
    fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let env = envelope(t, self.duration, self.edge);
        let common = match (self.noise, &self.real.phases) {
            (Some(spec), Some(p)) => noise_sum(t, spec, p, self.duration),
            _ => 0.0,
        };
        let pos = |r: &[f64; 3], v: &[f64; 3]| -> [f64; 3] { std::array::from_fn(|k| r[k] + v[k] * t) };
        let xc = pos(&self.real.rc, &self.real.vc);
        let xt = pos(&self.real.rt, &self.real.vt);
        let omega = self.design.laser.rabi * env;
        let laser = |x: f64| LaserParams {
            rabi: omega * C64::from_polar(1.0, self.k_eff * x + common),
            detuning: self.design.laser.detuning,
        };
        let d2: f64 = (0..3).map(|k| (xc[k] - xt[k]).powi(2)).sum();
        let v = InteractionParams::new(self.c6 / d2.powi(3));
        let leak = LeakageSpec { omega_d: self.leak.omega_d * env, omega_s: self.leak.omega_s * env, ..self.leak };
        h_leak_two_atom(&leak, &laser(xc[0]), &laser(xt[0]), &v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Control,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub atom: Atom,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    /// Normalized final state in the 36-level pair basis.
    pub state: StateVector,
    pub jumps: Vec<Jump>,
    /// ⟨k|ψ⟩ for the computational input k.
    pub amplitude: C64,
    /// Amplitude referred to the target phase of input k.
    pub overlap: C64,
    /// Norm² the no-jump evolution would have kept; lies in [0, 1].
    pub no_jump_norm: f64,
}

impl TrajectoryOutcome {
    pub fn decayed(&self) -> bool {
        !self.jumps.is_empty()
    }
}

/// Per-step block propagators of one realization, decay folded in by a
/// symmetric split `e^{−Γdt/2} e^{−iHdt} e^{−Γdt/2}`.
pub struct GatePropagator {
    blocks: Vec<Vec<usize>>,
    steps: Vec<Vec<Option<ComplexMatrix>>>,
    ends: Vec<f64>,
    pub duration: f64,
}

impl GatePropagator {
    /// `all_blocks` also prepares the blocks reached after a decay, which
    /// trajectories need.
    pub fn build(
        scenario: &NoiseScenario,
        design: &GateDesignU1,
        real: &Realization,
        duration: f64,
        all_blocks: bool,
    ) -> Result<Self> {
        if 2.0 * scenario.edge > duration {
            return Err(Error::param("edge", "ramps longer than the pulse"));
        }
        let drive = Drive {
            design,
            real,
            leak: scenario.leak.resolve(design.laser.rabi.norm()),
            noise: scenario.phase_noise.as_ref(),
            c6: scenario.c6_for(design),
            k_eff: scenario.beams.k_eff(),
            duration,
            edge: scenario.edge,
        };
        let gamma = scenario.lifetime.map_or(0.0, |tau| 1.0 / tau);
        // keep the per-step norm drop below 5%
        let max_dt = if gamma > 0.0 { -(0.95f64.ln()) / (2.0 * gamma) } else { f64::INFINITY };
        let grid = time_grid(duration, scenario.edge, scenario.steps, max_dt);
        let blocks = block_indices();
        let wanted: Vec<bool> = (0..blocks.len()).map(|b| all_blocks || INPUT_BLOCK.contains(&b)).collect();
        let mut steps = Vec::with_capacity(grid.len());
        let mut ends = Vec::with_capacity(grid.len());
        let mut t_end = 0.0;
        for &(t, dt) in &grid {
            let h = drive.hamiltonian(t);
            let mut per_block = Vec::with_capacity(blocks.len());
            for (b, idx) in blocks.iter().enumerate() {
                if !wanted[b] {
                    per_block.push(None);
                    continue;
                }
                let sub = ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
                let mut u = eig_numeric(&sub)?.propagator(dt);
                if gamma > 0.0 {
                    let half: Vec<f64> = idx.iter().map(|&i| (-0.25 * gamma * dt * rydberg_count(i)).exp()).collect();
                    for i in 0..idx.len() {
                        for j in 0..idx.len() {
                            u[(i, j)] *= half[i] * half[j];
                        }
                    }
                }
                per_block.push(Some(u));
            }
            steps.push(per_block);
            t_end += dt;
            ends.push(t_end);
        }
        Ok(GatePropagator { blocks, steps, ends, duration })
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    fn step(&self, s: usize, psi: &mut StateVector) -> Result<()> {
        for (b, idx) in self.blocks.iter().enumerate() {
            if idx.iter().all(|&i| psi[i] == C64::new(0.0, 0.0)) {
                continue;
            }
            let u = self.steps[s][b]
                .as_ref()
                .ok_or_else(|| Error::Domain(format!("block {b} was not prepared for this propagator")))?;
            let sub = StateVector::from_iterator(idx.len(), idx.iter().map(|&i| psi[i]));
            let out = u * sub;
            for (k, &i) in idx.iter().enumerate() {
                psi[i] = out[k];
            }
        }
        Ok(())
    }

    /// Non-Hermitian evolution without renormalization.
    pub fn evolve(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.len() != PAIR_DIM {
            return Err(Error::DimensionMismatch { expected: PAIR_DIM, got: psi.len() });
        }
        let mut out = psi.clone();
        for s in 0..self.steps.len() {
            self.step(s, &mut out)?;
        }
        Ok(out)
    }

    /// Projected 4×4 action on the computational subspace.
    pub fn gate_matrix(&self) -> Result<ComplexMatrix> {
        let mut g = ComplexMatrix::zeros(4, 4);
        for (k, &src) in COMPUTATIONAL.iter().enumerate() {
            let psi = self.evolve(&basis_state(PAIR_DIM, src))?;
            for (j, &dst) in COMPUTATIONAL.iter().enumerate() {
                g[(j, k)] = psi[dst];
            }
        }
        Ok(g)
    }

    /// One waiting-time Monte-Carlo trajectory from computational input `input`.
    pub fn mcwf(&self, input: usize, target: &ComplexMatrix, rng: &mut StreamRng) -> Result<TrajectoryOutcome> {
        if input >= 4 {
            return Err(Error::param("input", format!("computational index 0..4, got {input}")));
        }
        let mut psi = basis_state(PAIR_DIM, COMPUTATIONAL[input]);
        let mut threshold: f64 = rng.random();
        let mut jumps = Vec::new();
        let mut kept = 1.0;
        for s in 0..self.steps.len() {
            let before = psi.norm_squared();
            self.step(s, &mut psi)?;
            let after = psi.norm_squared();
            if jumps.is_empty() {
                kept *= after / before;
            }
            if after < threshold {
                let jump = self.pick_jump(std::slice::from_ref(&psi), self.ends[s], rng);
                psi = apply_jump(&psi, jump.atom, jump.level);
                psi /= C64::new(psi.norm(), 0.0);
                jumps.push(jump);
                threshold = rng.random();
            }
        }
        let n = psi.norm();
        if n > 0.0 {
            psi /= C64::new(n, 0.0);
        }
        let amplitude = psi[COMPUTATIONAL[input]];
        let t = target[(input, input)];
        let overlap = amplitude * t.conj() / t.norm().max(1e-300);
        Ok(TrajectoryOutcome { state: psi, jumps, amplitude, overlap, no_jump_norm: kept.clamp(0.0, 1.0) })
    }

    /// Trajectory of the four computational inputs unravelled together, as
    /// the columns of one process state. Returns the projected 4×4 block,
    /// scaled so that the full 36×4 state has Frobenius norm² 4; its
    /// trajectory average of the Pedersen error equals the channel value.
    pub fn mcwf_process(&self, rng: &mut StreamRng) -> Result<(ComplexMatrix, Vec<Jump>)> {
        let mut cols: Vec<StateVector> = COMPUTATIONAL.iter().map(|&i| basis_state(PAIR_DIM, i)).collect();
        let norm = |c: &[StateVector]| c.iter().map(|v| v.norm_squared()).sum::<f64>() / 4.0;
        let mut threshold: f64 = rng.random();
        let mut jumps = Vec::new();
        for s in 0..self.steps.len() {
            for c in cols.iter_mut() {
                self.step(s, c)?;
            }
            if norm(&cols) < threshold {
                let jump = self.pick_jump(&cols, self.ends[s], rng);
                for c in cols.iter_mut() {
                    *c = apply_jump(c, jump.atom, jump.level);
                }
                let n = norm(&cols).sqrt();
                for c in cols.iter_mut() {
                    *c /= C64::new(n, 0.0);
                }
                jumps.push(jump);
                threshold = rng.random();
            }
        }
        let n = norm(&cols).sqrt();
        let mut g = ComplexMatrix::zeros(4, 4);
        for (k, c) in cols.iter().enumerate() {
            for (j, &dst) in COMPUTATIONAL.iter().enumerate() {
                g[(j, k)] = c[dst] / n;
            }
        }
        Ok((g, jumps))
    }

    fn pick_jump(&self, cols: &[StateVector], time: f64, rng: &mut StreamRng) -> Jump {
        let mut channels = Vec::with_capacity(6);
        for atom in [Atom::Control, Atom::Target] {
            for level in [Level::R, Level::D, Level::S] {
                let w: f64 = (0..6)
                    .map(|o| {
                        let i = match atom {
                            Atom::Control => pair(level, LEVELS[o]),
                            Atom::Target => pair(LEVELS[o], level),
                        };
                        cols.iter().map(|c| c[i].norm_sqr()).sum::<f64>()
                    })
                    .sum();
                channels.push((Jump { time, atom, level }, w));
            }
        }
        let total: f64 = channels.iter().map(|c| c.1).sum();
        let mut u = rng.random::<f64>() * total;
        for (j, w) in &channels {
            if u < *w {
                return *j;
            }
            u -= w;
        }
        channels.iter().rev().find(|c| c.1 > 0.0).map_or(channels[0].0, |c| c.0)
    }
}

/// `|a⟩⟨level|` on one atom.
fn apply_jump(psi: &StateVector, atom: Atom, level: Level) -> StateVector {
    let mut out = StateVector::zeros(PAIR_DIM);
    for o in LEVELS {
        let (from, to) = match atom {
            Atom::Control => (pair(level, o), pair(Level::A, o)),
            Atom::Target => (pair(o, level), pair(o, Level::A)),
        };
        out[to] = psi[from];
    }
    out
}

/// Noise-free reference: the diagonal phases of the same pulse with the atoms
/// at rest at the trap centres, no phase noise and no decay.
pub fn reference_target(scenario: &NoiseScenario, design: &GateDesignU1, duration: f64) -> Result<ComplexMatrix> {
    let quiet = NoiseScenario { lifetime: None, phase_noise: None, ..scenario.clone() };
    let g = GatePropagator::build(&quiet, design, &Realization::nominal(scenario.spacing_um), duration, false)?
        .gate_matrix()?;
    let phases: Vec<C64> = (0..4).map(|k| C64::from_polar(1.0, g[(k, k)].arg())).collect();
    Ok(diag(&phases))
}

/// Deterministic norm loss 1 − ‖ψ(t)‖² for a computational input, atoms at
/// rest at the trap centres.
pub fn nonhermitian_loss(scenario: &NoiseScenario, design: &GateDesignU1, input: usize) -> Result<f64> {
    if input >= 4 {
        return Err(Error::param("input", format!("computational index 0..4, got {input}")));
    }
    let duration = gate_duration(scenario, design)?;
    let p = GatePropagator::build(scenario, design, &Realization::nominal(scenario.spacing_um), duration, false)?;
    let psi = p.evolve(&basis_state(PAIR_DIM, COMPUTATIONAL[input]))?;
    Ok(1.0 - psi.norm_squared())
}

/// Mean of [`nonhermitian_loss`] over the four inputs.
pub fn average_decay_loss(scenario: &NoiseScenario, design: &GateDesignU1) -> Result<f64> {
    let duration = gate_duration(scenario, design)?;
    let p = GatePropagator::build(scenario, design, &Realization::nominal(scenario.spacing_um), duration, false)?;
    let mut acc = 0.0;
    for &i in &COMPUTATIONAL {
        acc += 1.0 - p.evolve(&basis_state(PAIR_DIM, i))?.norm_squared();
    }
    Ok(acc / 4.0)
}

/// A single trajectory for the nominal realization.
pub fn mcwf_trajectory(
    scenario: &NoiseScenario,
    design: &GateDesignU1,
    input: usize,
    rng: &mut StreamRng,
) -> Result<TrajectoryOutcome> {
    let duration = gate_duration(scenario, design)?;
    let target = reference_target(scenario, design, duration)?;
    let p = GatePropagator::build(scenario, design, &Realization::nominal(scenario.spacing_um), duration, true)?;
    p.mcwf(input, &target, rng)
}

/// Fraction of decayed trajectories and its standard error, nominal realization.
pub fn mcwf_loss(
    scenario: &NoiseScenario,
    design: &GateDesignU1,
    input: usize,
    n_traj: usize,
    mode: ExecMode,
) -> Result<(f64, f64)> {
    let duration = gate_duration(scenario, design)?;
    let target = reference_target(scenario, design, duration)?;
    let p = GatePropagator::build(scenario, design, &Realization::nominal(scenario.spacing_um), duration, true)?;
    let hits = map_indexed(mode, n_traj, |j| {
        let mut rng = stream(scenario.seed, j as u64, Channel::Jumps);
        p.mcwf(input, &target, &mut rng).map(|o| o.decayed())
    });
    let mut k = 0usize;
    for h in hits {
        k += h? as usize;
    }
    let n = n_traj.max(1) as f64;
    let mean = k as f64 / n;
    Ok((mean, (mean * (1.0 - mean) / n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Estimator {
    /// Norm-losing evolution; exact average over decay records.
    NonHermitian,
    /// `n_traj` trajectory sets per realization.
    Mcwf { n_traj: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchAveraging {
    /// Every sample runs every drift branch.
    Full,
    /// Sample k runs branch k mod (number of branches).
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityOptions {
    pub n_samples: usize,
    pub estimator: Estimator,
    pub branches: BranchAveraging,
    pub bootstrap: usize,
    /// Flags the report when the CI is wider than this.
    pub ci_tolerance: Option<f64>,
    pub mode: ExecMode,
}

impl Default for FidelityOptions {
    fn default() -> Self {
        FidelityOptions {
            n_samples: 16,
            estimator: Estimator::NonHermitian,
            branches: BranchAveraging::Full,
            bootstrap: 2000,
            ci_tolerance: None,
            mode: ExecMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Number of (branch, sample) units averaged.
    pub n_units: usize,
    pub per_branch: Vec<f64>,
    pub ci_flagged: bool,
    pub duration: f64,
    pub unit_errors: Vec<f64>,
}

fn positions_for(
    scenario: &NoiseScenario,
    sample: usize,
) -> Vec<(f64, [f64; 3], [f64; 3])> {
    let centre_t = [0.0, 0.0, scenario.spacing_um];
    match scenario.positions {
        PositionMode::Centers => vec![(1.0, [0.0; 3], centre_t)],
        PositionMode::MonteCarlo => {
            let mut rng = stream(scenario.seed, sample as u64, Channel::Positions);
            let (rc, rt) = sample_positions(&scenario.trap, scenario.temperature, scenario.spacing_um, &mut rng);
            vec![(1.0, rc, rt)]
        }
        PositionMode::ThreePoint => {
            let sx = scenario.trap.sigmas(scenario.temperature)[0];
            let side = (-0.5f64).exp();
            let norm = 1.0 + 2.0 * side;
            vec![
                (side / norm, [-sx, 0.0, 0.0], centre_t),
                (1.0 / norm, [0.0; 3], centre_t),
                (side / norm, [sx, 0.0, 0.0], centre_t),
            ]
        }
    }
}

fn realization_error(
    scenario: &NoiseScenario,
    design: &GateDesignU1,
    real: &Realization,
    duration: f64,
    target: &ComplexMatrix,
    estimator: Estimator,
    unit: usize,
) -> Result<f64> {
    match estimator {
        Estimator::NonHermitian => {
            let p = GatePropagator::build(scenario, design, real, duration, false)?;
            pedersen_error(target, &p.gate_matrix()?)
        }
        Estimator::Mcwf { n_traj } => {
            let p = GatePropagator::build(scenario, design, real, duration, true)?;
            let mut acc = 0.0;
            for j in 0..n_traj {
                let mut rng = stream(scenario.seed, ((unit as u64) << 32) | j as u64, Channel::Jumps);
                acc += pedersen_error(target, &p.mcwf_process(&mut rng)?.0)?;
            }
            Ok(acc / n_traj.max(1) as f64)
        }
    }
}

fn bootstrap_ci(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n.max(1) as f64;
    if n < 2 || resamples == 0 {
        return (mean, mean);
    }
    let mut rng = stream(seed, 0, Channel::Bootstrap);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (at(0.025), at(0.975))
}

/// Mean Pedersen error against the noise-free reference over drift branches
/// and sampled realizations, with a bootstrap 95% interval.
pub fn noisy_gate_fidelity(
    scenario: &NoiseScenario,
    design: &GateDesignU1,
    opts: &FidelityOptions,
) -> Result<FidelityReport> {
    scenario.validate()?;
    if opts.n_samples == 0 {
        return Err(Error::param("n_samples", "must be positive"));
    }
    let duration = gate_duration(scenario, design)?;
    let target = reference_target(scenario, design, duration)?;
    let branches = scenario.drift_mode.branches();
    let nb = branches.len();
    let n_units = match opts.branches {
        BranchAveraging::Full => nb * opts.n_samples,
        BranchAveraging::Stratified => opts.n_samples,
    };
    let v = thermal_speed(scenario.temperature);
    let results = map_indexed(opts.mode, n_units, |u| -> Result<(usize, f64)> {
        let (branch, sample) = match opts.branches {
            BranchAveraging::Full => (u % nb, u / nb),
            BranchAveraging::Stratified => (u % nb, u),
        };
        let (dc, dt) = branches[branch];
        let phases = scenario.phase_noise.as_ref().map(|spec| {
            let mut rng = stream(scenario.seed, sample as u64, Channel::PhaseNoise);
            spec.random_phases(&mut rng)
        });
        let mut err = 0.0;
        for (w, rc, rt) in positions_for(scenario, sample) {
            let real = Realization { rc, rt, vc: dc.map(|d| d * v), vt: dt.map(|d| d * v), phases: phases.clone() };
            err += w * realization_error(scenario, design, &real, duration, &target, opts.estimator, u)?;
        }
        Ok((branch, err))
    });
    let mut unit_errors = Vec::with_capacity(n_units);
    let mut sums = vec![(0.0, 0usize); nb];
    for r in results {
        let (b, e) = r?;
        unit_errors.push(e);
        sums[b].0 += e;
        sums[b].1 += 1;
    }
    let mean = unit_errors.iter().sum::<f64>() / n_units as f64;
    let (ci_low, ci_high) = bootstrap_ci(&unit_errors, opts.bootstrap, scenario.seed);
    let ci_flagged = opts.ci_tolerance.is_some_and(|tol| ci_high - ci_low > tol);
    Ok(FidelityReport {
        mean,
        ci_low,
        ci_high,
        n_units,
        per_branch: sums.iter().map(|(s, n)| if *n > 0 { s / *n as f64 } else { f64::NAN }).collect(),
        ci_flagged,
        duration,
        unit_errors,
    })
}

/// How the Rayleigh-like range 𝒵_k of the ratio formula is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeConvention {
    /// πR²/λ_k, the Rayleigh range.
    Rayleigh,
    /// πR²/λ_k², as printed alongside the formula.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBeams {
    pub beams: Beams,
    pub spacing_um: f64,
    pub convention: RangeConvention,
}

impl RatioBeams {
    fn ranges(&self) -> [f64; 2] {
        let r2 = self.beams.radius_um.powi(2);
        let l = [self.beams.lambda1_um, self.beams.lambda2_um];
        l.map(|lam| match self.convention {
            RangeConvention::Rayleigh => PI * r2 / lam,
            RangeConvention::Printed => PI * r2 / (lam * lam),
        })
    }
}

/// |Ω_c|/|Ω_t| for focused beams with foci at `(0,0,L/2)`.
pub fn rabi_ratio_gaussian(rc: [f64; 3], rt: [f64; 3], beams: &RatioBeams) -> f64 {
    let half = 0.5 * beams.spacing_um;
    let r2 = beams.beams.radius_um.powi(2);
    beams
        .ranges()
        .iter()
        .map(|&z| {
            let z2 = z * z;
            let a = z2 + (rt[2] - half).powi(2);
            let b = z2 + (rc[2] - half).powi(2);
            let radial = (rt[0] * rt[0] + rt[1] * rt[1]) / a - (rc[0] * rc[0] + rc[1] * rc[1]) / b;
            a / b * (z2 / r2 * radial).exp()
        })
        .product()
}

/// Mean |1 − ratio| over Gaussian position fluctuations `spread` (µm).
pub fn mean_ratio_deviation(spread: [f64; 3], beams: &RatioBeams, n: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, 0, Channel::Positions);
    let mut draw = |centre: [f64; 3]| -> [f64; 3] {
        std::array::from_fn(|k| centre[k] + if spread[k] > 0.0 { Normal::new(0.0, spread[k]).unwrap().sample(&mut rng) } else { 0.0 })
    };
    let mut acc = 0.0;
    for _ in 0..n {
        let rc = draw([0.0; 3]);
        let rt = draw([0.0, 0.0, beams.spacing_um]);
        acc += (1.0 - rabi_ratio_gaussian(rc, rt, beams)).abs();
    }
    acc / n.max(1) as f64
}
