//! Two-photon Rabi frequencies of ⁸⁷Rb through the 5P₃/₂ hyperfine manifold,
//! for the target Rydberg state and for the nearby leakage levels.
//!
//! Each path 5S₁/₂(F, m_F) → 5P₃/₂(F′) → nL_J(m_J, m_I) carries an angular
//! factor built from Clebsch–Gordan coefficients and 6-j reductions
//! (L → J → F). The Rydberg states are hyperfine-decoupled, so the upper
//! transition first splits F′ into (J′ m_J′)(I m_I). Radial reduced elements
//! are inputs: the lower one is common to every path and the upper ones are
//! given relative to (100S‖r‖5P).
//!
//! Angular momenta are handled as doubled integers (`2j`) internally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{clebsch_gordan_exact, wigner_6j_exact, SqrtRational};
use crate::units::mhz;
use num_bigint::BigInt;
use num_rational::BigRational;

/// Doubled nuclear spin of ⁸⁷Rb.
const I2: i64 = 3;
/// Doubled electron spin.
const S2: i64 = 1;
/// Doubled J of 5P₃/₂.
const JP2: i64 = 3;

/// Ground hyperfine state 5S₁/₂ |F, m_F⟩, doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundState {
    pub f2: i64,
    pub m2: i64,
}

impl GroundState {
    /// Qubit |0⟩ = |F=1, m_F=1⟩.
    pub const ZERO: GroundState = GroundState { f2: 2, m2: 2 };
    /// Qubit |1⟩ = |F=2, m_F=2⟩.
    pub const ONE: GroundState = GroundState { f2: 4, m2: 4 };
}

/// Hyperfine-decoupled Rydberg Zeeman state |nL_J, m_J, m_I⟩, doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RydbergState {
    pub l2: i64,
    pub j2: i64,
    pub mj2: i64,
    pub mi2: i64,
}

/// Rydberg manifold reached by the excitation lasers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    /// 100S₁/₂, the gate state |r⟩.
    Target,
    /// 98D₃/₂ and 98D₅/₂, leakage from |1⟩.
    D98,
    /// 99S₁/₂, leakage from |0⟩.
    S99,
}

impl Manifold {
    fn fine_levels(self) -> &'static [(i64, i64)] {
        match self {
            Manifold::Target | Manifold::S99 => &[(0, 1)],
            Manifold::D98 => &[(4, 3), (4, 5)],
        }
    }

    /// Zeeman components with total projection `m2`.
    pub fn states(self, m2: i64) -> Vec<RydbergState> {
        let mut out = Vec::new();
        for &(l2, j2) in self.fine_levels() {
            for mj2 in (-j2..=j2).step_by(2) {
                let mi2 = m2 - mj2;
                if mi2.abs() <= I2 {
                    out.push(RydbergState { l2, j2, mj2, mi2 });
                }
            }
        }
        out
    }
}

/// Leakage channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakChannel {
    /// |1⟩ → |d⟩ in 98D.
    D,
    /// |0⟩ → |s⟩ in 99S.
    S,
}

/// Upper radial elements relative to (100S‖r‖5P).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialRatios {
    /// (98D‖r‖5P)/(100S‖r‖5P).
    pub d98: f64,
    /// (99S‖r‖5P)/(100S‖r‖5P).
    pub s99: f64,
}

impl Default for RadialRatios {
    /// Effective values that give Ω_d : Ω₀ : Ω_s = 2 : 1 : 0.84 with the
    /// default scheme (δ_2pho/2π = 2 GHz, π-polarized beams).
    fn default() -> Self {
        RadialRatios { d98: DEFAULT_D98, s99: DEFAULT_S99 }
    }
}

// Calibrated against the 2 : 1 : 0.84 endpoint, not computed from wavefunctions.
const DEFAULT_D98: f64 = 2.0;
const DEFAULT_S99: f64 = 1.578713354674;

/// How the F′ = 1, 2, 3 intermediate paths are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSum {
    /// Root of the summed squares of the path amplitudes.
    #[default]
    Quadrature,
    /// Signed sum of the path amplitudes.
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationScheme {
    /// Lower-laser detuning from F′=3 for the |1⟩ transition, rad/s.
    pub delta_2pho: f64,
    /// F′=3 − F′=2 splitting of 5P₃/₂, rad/s.
    pub delta_hyp: f64,
    /// F′=2 − F′=1 splitting, rad/s.
    pub delta_hyp_21: f64,
    /// F′=1 − F′=0 splitting, rad/s.
    pub delta_hyp_10: f64,
    /// Ground-state F=2 − F=1 splitting, rad/s.
    pub ground_splitting: f64,
    /// Field amplitudes of the lower and upper lasers (common arbitrary scale).
    pub field_low: f64,
    pub field_upp: f64,
    /// (5P‖r‖5S), common to all paths.
    pub radial_low: f64,
    /// (100S‖r‖5P).
    pub radial_upp: f64,
    pub radial_ratios: RadialRatios,
    /// Spherical components q of the lower and upper polarizations.
    pub q_low: i64,
    pub q_upp: i64,
    pub paths: PathSum,
}

impl Default for ExcitationScheme {
    fn default() -> Self {
        ExcitationScheme {
            delta_2pho: mhz(2000.0),
            delta_hyp: mhz(266.65),
            delta_hyp_21: mhz(156.95),
            delta_hyp_10: mhz(72.22),
            ground_splitting: mhz(6834.682611),
            field_low: 1.0,
            field_upp: 1.0,
            radial_low: 1.0,
            radial_upp: 1.0,
            radial_ratios: RadialRatios::default(),
            q_low: 0,
            q_upp: 0,
            paths: PathSum::Quadrature,
        }
    }
}

impl ExcitationScheme {
    /// Detuning of the lower laser from 5S(F) → 5P₃/₂(F′).
    pub fn path_detuning(&self, ground_f2: i64, fp2: i64) -> f64 {
        let below_f3 = match fp2 {
            6 => 0.0,
            4 => self.delta_hyp,
            2 => self.delta_hyp + self.delta_hyp_21,
            _ => self.delta_hyp + self.delta_hyp_21 + self.delta_hyp_10,
        };
        let ground = if ground_f2 == 2 { -self.ground_splitting } else { 0.0 };
        self.delta_2pho + below_f3 + ground
    }

    fn radial_for(&self, m: Manifold) -> f64 {
        self.radial_upp
            * match m {
                Manifold::Target => 1.0,
                Manifold::D98 => self.radial_ratios.d98,
                Manifold::S99 => self.radial_ratios.s99,
            }
    }

    fn validate(&self) -> Result<()> {
        if ![self.q_low, self.q_upp].iter().all(|q| q.abs() <= 1) {
            return Err(Error::param("polarization", "spherical components must lie in {-1, 0, 1}"));
        }
        Ok(())
    }
}

fn sqrt_int(n: i64) -> SqrtRational {
    SqrtRational { coef: BigRational::from_integer(1.into()), radicand: BigRational::from_integer(BigInt::from(n)) }
}

fn sign(exponent2: i64) -> SqrtRational {
    debug_assert!(exponent2 % 2 == 0);
    let s = if (exponent2 / 2) % 2 == 0 { 1 } else { -1 };
    SqrtRational { coef: BigRational::from_integer(BigInt::from(s)), radicand: BigRational::from_integer(1.into()) }
}

fn inv_sqrt_int(n: i64) -> SqrtRational {
    SqrtRational {
        coef: BigRational::from_integer(1.into()),
        radicand: BigRational::new(BigInt::from(1), BigInt::from(n)),
    }
}

/// ⟨(a′ s) J′‖T¹‖(a s) J⟩ / ⟨a′‖T¹‖a⟩ for a rank-1 operator acting on `a`.
fn reduce(ap2: i64, a2: i64, s2: i64, jp2: i64, j2: i64) -> SqrtRational {
    sign(ap2 + s2 + j2 + 2)
        .mul(&sqrt_int((j2 + 1) * (jp2 + 1)))
        .mul(&wigner_6j_exact(ap2, jp2, s2, j2, a2, 2))
}

/// Angular factor of one path, radial elements and fields excluded.
pub fn path_factor_exact(g: GroundState, fp2: i64, f: RydbergState, q_low: i64, q_upp: i64) -> SqrtRational {
    let mp2 = g.m2 + 2 * q_low;
    let mjp2 = f.mj2 - 2 * q_upp;
    if mjp2 + f.mi2 != mp2 || mjp2.abs() > JP2 {
        return SqrtRational::zero();
    }
    // 5S₁/₂ (L=0, J=1/2) → 5P₃/₂ (L=1, J=3/2), reduced to the L level.
    let lower = clebsch_gordan_exact(g.f2, g.m2, 2, 2 * q_low, fp2, mp2)
        .mul(&inv_sqrt_int(fp2 + 1))
        .mul(&reduce(JP2, 1, I2, fp2, g.f2))
        .mul(&reduce(2, 0, S2, JP2, 1));
    // F′ splits into (J′ m_J′)(I m_I); the dipole acts on J′ only.
    let upper = clebsch_gordan_exact(JP2, mjp2, I2, f.mi2, fp2, mp2)
        .mul(&clebsch_gordan_exact(JP2, mjp2, 2, 2 * q_upp, f.j2, f.mj2))
        .mul(&inv_sqrt_int(f.j2 + 1))
        .mul(&reduce(f.l2, 2, S2, f.j2, JP2));
    lower.mul(&upper)
}

pub fn path_factor(g: GroundState, fp2: i64, f: RydbergState, q_low: i64, q_upp: i64) -> f64 {
    path_factor_exact(g, fp2, f, q_low, q_upp).to_f64()
}

/// Two-photon Rabi frequency from `g` to one Rydberg Zeeman state.
pub fn component_rabi(scheme: &ExcitationScheme, g: GroundState, manifold: Manifold, f: RydbergState) -> Result<f64> {
    scheme.validate()?;
    let scale = scheme.field_low * scheme.radial_low * scheme.field_upp * scheme.radial_for(manifold);
    let mut amps = Vec::new();
    for fp2 in [0, 2, 4, 6] {
        let a = path_factor(g, fp2, f, scheme.q_low, scheme.q_upp);
        if a == 0.0 {
            continue;
        }
        let d = scheme.path_detuning(g.f2, fp2);
        if d.abs() < 1e-6 {
            return Err(Error::param("delta_2pho", format!("intermediate detuning via F'={} vanishes", fp2 / 2)));
        }
        amps.push(scale * a / (2.0 * d));
    }
    Ok(match scheme.paths {
        PathSum::Quadrature => amps.iter().map(|a| a * a).sum::<f64>().sqrt(),
        PathSum::Coherent => amps.iter().sum::<f64>().abs(),
    })
}

/// Rabi frequencies to every Zeeman component of `manifold` reachable from `g`.
pub fn zeeman_rabis(
    scheme: &ExcitationScheme,
    g: GroundState,
    manifold: Manifold,
) -> Result<Vec<(RydbergState, f64)>> {
    scheme.validate()?;
    let m2 = g.m2 + 2 * (scheme.q_low + scheme.q_upp);
    manifold.states(m2).into_iter().map(|f| Ok((f, component_rabi(scheme, g, manifold, f)?))).collect()
}

fn quadrature(parts: &[(RydbergState, f64)]) -> f64 {
    parts.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt()
}

/// Ω₀ from |1⟩ to the 100S gate state.
pub fn two_photon_rabi(scheme: &ExcitationScheme) -> Result<f64> {
    Ok(quadrature(&zeeman_rabis(scheme, GroundState::ONE, Manifold::Target)?))
}

/// Ω_d or Ω_s: quadrature over the Zeeman components the lasers reach.
pub fn leak_rabi(scheme: &ExcitationScheme, channel: LeakChannel) -> Result<f64> {
    let (g, m) = match channel {
        LeakChannel::D => (GroundState::ONE, Manifold::D98),
        LeakChannel::S => (GroundState::ZERO, Manifold::S99),
    };
    Ok(quadrature(&zeeman_rabis(scheme, g, m)?))
}

/// Normalized selection-rule coefficients ζ of the coupled leakage state.
pub fn zeta_coefficients(scheme: &ExcitationScheme, channel: LeakChannel) -> Result<Vec<(RydbergState, f64)>> {
    let (g, m) = match channel {
        LeakChannel::D => (GroundState::ONE, Manifold::D98),
        LeakChannel::S => (GroundState::ZERO, Manifold::S99),
    };
    let parts = zeeman_rabis(scheme, g, m)?;
    let total = quadrature(&parts);
    if total == 0.0 {
        return Ok(parts.into_iter().map(|(f, _)| (f, 0.0)).collect());
    }
    Ok(parts.into_iter().map(|(f, w)| (f, w / total)).collect())
}

/// Coupling to the state Σ ζ_k |k⟩ given per-component Rabi frequencies Ω_k.
/// The ζ must be normalized.
pub fn rabi_with_zetas(zetas: &[f64], omegas: &[f64]) -> Result<f64> {
    if zetas.len() != omegas.len() {
        return Err(Error::DimensionMismatch { expected: zetas.len(), got: omegas.len() });
    }
    let norm: f64 = zetas.iter().map(|z| z * z).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::param("zeta", format!("Σζ² must be 1, got {norm}")));
    }
    Ok(zetas.iter().zip(omegas).map(|(z, w)| z * w).sum::<f64>().abs())
}

/// Independent check of [`path_factor`]: expand all three states in the
/// uncoupled |m_L, m_S, m_I⟩ basis and sum the orbital dipole elements.
pub mod brute_force {
    use super::*;
    use crate::qmath::clebsch_gordan;
    use std::collections::HashMap;

    type Uncoupled = HashMap<(i64, i64, i64), f64>;

    fn cg(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
        clebsch_gordan(j1 as f64 / 2.0, m1 as f64 / 2.0, j2 as f64 / 2.0, m2 as f64 / 2.0, j as f64 / 2.0, m as f64 / 2.0)
    }

    /// |(L S) J m_J⟩ ⊗ |I m_I⟩.
    fn fine(l2: i64, j2: i64, mj2: i64, mi2: i64) -> Uncoupled {
        let mut v = Uncoupled::new();
        for ms2 in [-1, 1] {
            let ml2 = mj2 - ms2;
            let c = cg(l2, ml2, S2, ms2, j2, mj2);
            if c != 0.0 {
                *v.entry((ml2, ms2, mi2)).or_default() += c;
            }
        }
        v
    }

    /// |((L S) J I) F m_F⟩.
    fn hyperfine(l2: i64, j2: i64, f2: i64, m2: i64) -> Uncoupled {
        let mut v = Uncoupled::new();
        for mi2 in (-I2..=I2).step_by(2) {
            let mj2 = m2 - mi2;
            if mj2.abs() > j2 {
                continue;
            }
            let c = cg(j2, mj2, I2, mi2, f2, m2);
            for (k, a) in fine(l2, j2, mj2, mi2) {
                *v.entry(k).or_default() += c * a;
            }
        }
        v
    }

    /// ⟨b| r_q |a⟩ with unit orbital reduced element.
    fn dipole(b: &Uncoupled, lb2: i64, a: &Uncoupled, la2: i64, q: i64) -> f64 {
        let mut acc = 0.0;
        for (&(ml2, ms2, mi2), &ca) in a {
            let key = (ml2 + 2 * q, ms2, mi2);
            if let Some(&cb) = b.get(&key) {
                acc += cb * ca * cg(la2, ml2, 2, 2 * q, lb2, ml2 + 2 * q) / ((lb2 + 1) as f64).sqrt();
            }
        }
        acc
    }

    pub fn path_factor(g: GroundState, fp2: i64, f: RydbergState, q_low: i64, q_upp: i64) -> f64 {
        let ground = hyperfine(0, 1, g.f2, g.m2);
        let mp2 = g.m2 + 2 * q_low;
        if mp2.abs() > fp2 {
            return 0.0;
        }
        let inter = hyperfine(2, JP2, fp2, mp2);
        let fin = fine(f.l2, f.j2, f.mj2, f.mi2);
        dipole(&inter, 2, &ground, 0, q_low) * dipole(&fin, f.l2, &inter, 2, q_upp)
    }
}
