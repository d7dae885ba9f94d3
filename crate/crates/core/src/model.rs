//! Hamiltonian builders in the fixed basis orderings of [`crate::basis`].

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::basis::{Level, ATOM_DIM, LEVELS};
use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, C64};

/// Laser coupling on `|1⟩ ↔ |r⟩`: complex Rabi frequency and detuning, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    pub rabi: C64,
    pub detuning: f64,
}

impl LaserParams {
    pub fn new(rabi: f64, detuning: f64) -> Self {
        LaserParams { rabi: C64::new(rabi, 0.0), detuning }
    }

    pub fn with_phase(self, phase: f64) -> Self {
        LaserParams { rabi: C64::from_polar(self.rabi.norm(), self.rabi.arg() + phase), ..self }
    }

    /// Generalized Rabi frequency √(|Ω|² + Δ²).
    pub fn rabi_bar(&self) -> f64 {
        self.rabi.norm().hypot(self.detuning)
    }
}

/// Van der Waals shift of `|rr⟩`, optionally tied to `C6 / L⁶`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    pub v: f64,
    /// rad/s · µm⁶
    pub c6: Option<f64>,
    /// µm
    pub spacing: Option<f64>,
}

impl InteractionParams {
    pub fn new(v: f64) -> Self {
        InteractionParams { v, c6: None, spacing: None }
    }

    pub fn from_c6(c6: f64, spacing_um: f64) -> Result<Self> {
        if !(spacing_um > 0.0) {
            return Err(Error::param("spacing", format!("must be positive, got {spacing_um}")));
        }
        Ok(InteractionParams { v: c6 / spacing_um.powi(6), c6: Some(c6), spacing: Some(spacing_um) })
    }

    /// Checks `|V − C6/L⁶| < 1e−9 |V|` when both are present.
    pub fn validate(&self) -> Result<()> {
        if let (Some(c6), Some(l)) = (self.c6, self.spacing) {
            let implied = c6 / l.powi(6);
            if (self.v - implied).abs() > 1e-9 * self.v.abs() {
                return Err(Error::param("v", format!("{} inconsistent with C6/L^6 = {}", self.v, implied)));
            }
        }
        Ok(())
    }
}

/// Off-resonant couplings to the neighbouring Rydberg levels `|d⟩` (from `|1⟩`)
/// and `|s⟩` (from `|0⟩`), with their detunings. All rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LeakageSpec {
    pub omega_d: f64,
    pub omega_s: f64,
    pub delta_d: f64,
    pub delta_s: f64,
}

fn z(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `[[Δ, Ω/2], [Ω*/2, 0]]` in {|0r⟩, |01⟩}.
pub fn h_single(l: &LaserParams) -> ComplexMatrix {
    let h = l.rabi / 2.0;
    ComplexMatrix::from_row_slice(2, 2, &[z(l.detuning), h, h.conj(), z(0.0)])
}

/// `[[V+2Δ, Ω/√2, 0], [Ω*/√2, Δ, Ω/√2], [0, Ω*/√2, 0]]` in
/// {|rr⟩, (|1r⟩+|r1⟩)/√2, |11⟩}.
pub fn h_v1(l: &LaserParams, v: &InteractionParams) -> ComplexMatrix {
    let s = l.rabi / SQRT_2;
    let d = l.detuning;
    ComplexMatrix::from_row_slice(
        3,
        3,
        &[z(v.v + 2.0 * d), s, z(0.0), s.conj(), z(d), s, z(0.0), s.conj(), z(0.0)],
    )
}

fn hermitian_from_upper(n: usize, diag: &[f64], upper: &[(usize, usize, C64)]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for (i, &d) in diag.iter().enumerate() {
        h[(i, i)] = z(d);
    }
    for &(i, j, w) in upper {
        h[(i, j)] = w;
        h[(j, i)] = w.conj();
    }
    h
}

/// Both atoms driven, basis {|rr⟩, |r1⟩, |1r⟩, |11⟩}.
pub fn h_v2(lc: &LaserParams, lt: &LaserParams, v: &InteractionParams) -> ComplexMatrix {
    let (oc, ot) = (lc.rabi / 2.0, lt.rabi / 2.0);
    hermitian_from_upper(
        4,
        &[v.v + lc.detuning + lt.detuning, lc.detuning, lt.detuning, 0.0],
        &[(0, 1, ot), (0, 2, oc), (1, 3, oc), (2, 3, ot)],
    )
}

/// Only the target driven, basis {|rr⟩, |r1⟩, |1r⟩, |11⟩}.
pub fn h_vt(lt: &LaserParams, v: &InteractionParams) -> ComplexMatrix {
    let ot = lt.rabi / 2.0;
    hermitian_from_upper(4, &[v.v + lt.detuning, 0.0, lt.detuning, 0.0], &[(0, 1, ot), (2, 3, ot)])
}

/// Only the control driven, basis {|rr⟩, |r1⟩, |1r⟩, |11⟩}.
pub fn h_vc(lc: &LaserParams, v: &InteractionParams) -> ComplexMatrix {
    let oc = lc.rabi / 2.0;
    hermitian_from_upper(4, &[v.v + lc.detuning, lc.detuning, 0.0, 0.0], &[(0, 2, oc), (1, 3, oc)])
}

/// Target-only evolution once `|rr⟩` and `|r1⟩` are empty, basis {|1r⟩, |11⟩}.
pub fn h_vt_reduced(lt: &LaserParams) -> ComplexMatrix {
    h_single(lt)
}

/// One atom in the six-level leakage model, with levels laid out by `order`.
/// The leak couplings are driven by the same lasers and share the phase of
/// `l.rabi`.
pub fn h_leak_atom(order: &[Level], leak: &LeakageSpec, l: &LaserParams) -> Result<ComplexMatrix> {
    let pos = level_positions(order)?;
    let mut h = ComplexMatrix::zeros(ATOM_DIM, ATOM_DIM);
    let mut couple = |to: Level, from: Level, w: C64| {
        h[(pos[to.index()], pos[from.index()])] += w;
        h[(pos[from.index()], pos[to.index()])] += w.conj();
    };
    couple(Level::R, Level::One, l.rabi / 2.0);
    let phase = if l.rabi.norm() > 0.0 { l.rabi / l.rabi.norm() } else { z(1.0) };
    couple(Level::D, Level::One, phase * (leak.omega_d / 2.0));
    couple(Level::S, Level::Zero, phase * (leak.omega_s / 2.0));
    h[(pos[Level::R.index()], pos[Level::R.index()])] += z(l.detuning);
    h[(pos[Level::D.index()], pos[Level::D.index()])] += z(leak.delta_d);
    h[(pos[Level::S.index()], pos[Level::S.index()])] += z(leak.delta_s);
    Ok(h)
}

/// Two atoms in the leakage model in the canonical ordering.
pub fn h_leak_two_atom(leak: &LeakageSpec, lc: &LaserParams, lt: &LaserParams, v: &InteractionParams) -> ComplexMatrix {
    h_leak_two_atom_ordered(&LEVELS, leak, lc, lt, v).expect("canonical ordering is valid")
}

/// Two atoms in the leakage model with a caller-chosen per-atom ordering.
/// The ordering must be a permutation of the six levels.
pub fn h_leak_two_atom_ordered(
    order: &[Level],
    leak: &LeakageSpec,
    lc: &LaserParams,
    lt: &LaserParams,
    v: &InteractionParams,
) -> Result<ComplexMatrix> {
    let hc = h_leak_atom(order, leak, lc)?;
    let ht = h_leak_atom(order, leak, lt)?;
    let id = ComplexMatrix::identity(ATOM_DIM, ATOM_DIM);
    let mut h = hc.kronecker(&id) + id.kronecker(&ht);
    let r = level_positions(order)?[Level::R.index()];
    let rr = r * ATOM_DIM + r;
    h[(rr, rr)] += z(v.v);
    Ok(h)
}

fn level_positions(order: &[Level]) -> Result<[usize; ATOM_DIM]> {
    if order.len() != ATOM_DIM {
        return Err(Error::Basis(format!("expected {ATOM_DIM} levels, got {}", order.len())));
    }
    let mut pos = [usize::MAX; ATOM_DIM];
    for (i, lvl) in order.iter().enumerate() {
        if pos[lvl.index()] != usize::MAX {
            return Err(Error::Basis(format!("level {lvl:?} listed twice")));
        }
        pos[lvl.index()] = i;
    }
    Ok(pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{pair, PAIR_DIM};
    use crate::qmath::{eig_numeric, is_hermitian, propagate_const, basis_state};
    use crate::units::mhz;
    use proptest::prelude::*;

    fn table1_case1() -> (LaserParams, InteractionParams) {
        (LaserParams::new(mhz(10.0), mhz(19.252)), InteractionParams::new(mhz(-35.1818)))
    }

    #[test]
    fn single_zero_rabi_is_diagonal() {
        let h = h_single(&LaserParams::new(0.0, 3.0));
        assert_eq!(h, ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![z(3.0), z(0.0)])));
    }

    #[test]
    fn single_table_entries() {
        let (l, _) = table1_case1();
        let h = h_single(&l) / C64::new(mhz(1.0), 0.0);
        let want = [19.252, 5.0, 5.0, 0.0];
        for (k, w) in want.iter().enumerate() {
            assert!((h[(k / 2, k % 2)] - z(*w)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_complex_rabi_spectrum_phase_free() {
        let base = eig_numeric(&h_single(&LaserParams::new(2.0, 0.7))).unwrap();
        let rot = h_single(&LaserParams::new(2.0, 0.7).with_phase(1.1));
        assert!((rot[(0, 1)] - rot[(1, 0)].conj()).norm() < 1e-15);
        let es = eig_numeric(&rot).unwrap();
        for k in 0..2 {
            assert!((es.values[k] - base.values[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn v1_zero_rabi() {
        let h = h_v1(&LaserParams::new(0.0, 1.5), &InteractionParams::new(-2.0));
        assert_eq!(h[(0, 0)], z(1.0));
        assert_eq!(h[(1, 1)], z(1.5));
        assert_eq!(h[(2, 2)], z(0.0));
        assert_eq!(h[(0, 1)], z(0.0));
    }

    #[test]
    fn v1_gaps_are_integer_multiples() {
        let (l, v) = table1_case1();
        let es = eig_numeric(&h_v1(&l, &v)).unwrap();
        let tg = 2.0 * 4.0 * std::f64::consts::PI / l.rabi_bar();
        // ascending ε ↔ descending 𝒞 = (2, 1, −3)
        let m = [2.0, 1.0, -3.0];
        let mut cycles = [0.0; 3];
        for k in 0..3 {
            cycles[k] = (l.detuning + v.v / 3.0 - es.values[k]) * tg / (2.0 * std::f64::consts::PI);
        }
        for i in 0..3 {
            for j in 0..3 {
                let got = cycles[i] - cycles[j];
                let want = m[i] - m[j];
                assert!((got - want).abs() < 1e-4 * want.abs().max(1.0), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn v2_embeds_v1_spectrum() {
        let l = LaserParams::new(1.3, -0.4);
        let v = InteractionParams::new(2.2);
        let e1 = eig_numeric(&h_v1(&l, &v)).unwrap().values;
        let e2 = eig_numeric(&h_v2(&l, &l, &v)).unwrap().values;
        for x in e1 {
            assert!(e2.iter().any(|y| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn v2_zero_couplings() {
        let (lc, lt) = (LaserParams::new(0.0, 1.0), LaserParams::new(0.0, 2.0));
        let h = h_v2(&lc, &lt, &InteractionParams::new(5.0));
        let d: Vec<f64> = (0..4).map(|k| h[(k, k)].re).collect();
        assert_eq!(d, vec![8.0, 1.0, 2.0, 0.0]);
        assert!(h.iter().enumerate().all(|(k, w)| k % 5 == 0 || *w == z(0.0)));
    }

    #[test]
    fn v2_table2_trace() {
        let lc = LaserParams::new(mhz(5.306482), mhz(0.8152206));
        let lt = LaserParams::new(mhz(10.0), mhz(3.329994));
        let v = InteractionParams::new(mhz(-5.442221));
        let h = h_v2(&lc, &lt, &v);
        assert!(is_hermitian(&h));
        let want = v.v + 2.0 * lc.detuning + 2.0 * lt.detuning;
        assert!((h.trace().re - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn vt_and_reduced() {
        let lt = LaserParams::new(0.0, 2.0);
        let h = h_vt(&lt, &InteractionParams::new(3.0));
        let d: Vec<f64> = (0..4).map(|k| h[(k, k)].re).collect();
        assert_eq!(d, vec![5.0, 0.0, 2.0, 0.0]);

        let lt = LaserParams::new(1.7, -0.3).with_phase(0.4);
        let full = h_vt(&lt, &InteractionParams::new(3.0));
        let sub = full.view((2, 2), (2, 2)).into_owned();
        assert_eq!(sub, h_vt_reduced(&lt));
        assert_eq!(h_vt_reduced(&lt), h_single(&lt));
    }

    #[test]
    fn vc_structure() {
        let lc = LaserParams::new(1.0, 0.5);
        let h = h_vc(&lc, &InteractionParams::new(3.0));
        assert_eq!(h[(0, 0)], z(3.5));
        assert_eq!(h[(1, 1)], z(0.5));
        assert_eq!(h[(0, 2)], z(0.5));
        assert_eq!(h[(1, 3)], z(0.5));
        assert_eq!(h[(2, 3)], z(0.0));
    }

    #[test]
    fn interaction_from_c6() {
        let c6 = crate::units::thz(56.2);
        let v = InteractionParams::from_c6(c6, 16.5).unwrap();
        assert!(v.validate().is_ok());
        assert!((crate::units::to_mhz(v.v) - 2.81).abs() < 0.02 * 2.81);
        let bad = InteractionParams { v: v.v * 1.01, ..v };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn leak_reduces_to_three_level_model() {
        let lc = LaserParams::new(0.8, -1.5).with_phase(0.3);
        let lt = LaserParams::new(0.8, -1.5);
        let v = InteractionParams::new(2.8);
        let h = h_leak_two_atom(&LeakageSpec::default(), &lc, &lt, &v);
        assert!(is_hermitian(&h));
        // {0,1,r}⊗{0,1,r}: driven terms, detunings and V only
        let lv = [Level::Zero, Level::One, Level::R];
        for &a in &lv {
            for &b in &lv {
                for &c in &lv {
                    for &d in &lv {
                        let got = h[(pair(a, b), pair(c, d))];
                        let mut want = z(0.0);
                        let one_atom = |x: Level, y: Level, l: &LaserParams| match (x, y) {
                            (Level::R, Level::R) => z(l.detuning),
                            (Level::R, Level::One) => l.rabi / 2.0,
                            (Level::One, Level::R) => l.rabi.conj() / 2.0,
                            _ => z(0.0),
                        };
                        if b == d {
                            want += one_atom(a, c, &lc);
                        }
                        if a == c {
                            want += one_atom(b, d, &lt);
                        }
                        if a == Level::R && b == Level::R && c == Level::R && d == Level::R {
                            want += z(v.v);
                        }
                        assert!((got - want).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn leak_virtual_level_uncoupled() {
        let leak = LeakageSpec { omega_d: 1.6, omega_s: 0.67, delta_d: 100.0, delta_s: 50.0 };
        let h = h_leak_two_atom(&leak, &LaserParams::new(0.8, -1.5), &LaserParams::new(0.8, -1.5), &InteractionParams::new(2.8));
        let a = Level::A.index();
        for i in 0..PAIR_DIM {
            for j in 0..PAIR_DIM {
                let (ci, ti, cj, tj) = (i / ATOM_DIM, i % ATOM_DIM, j / ATOM_DIM, j % ATOM_DIM);
                if (ci == a) != (cj == a) || (ti == a) != (tj == a) {
                    assert_eq!(h[(i, j)], z(0.0), "({i}, {j})");
                }
            }
            if i / ATOM_DIM == a && i % ATOM_DIM == a {
                assert_eq!(h[(i, i)], z(0.0));
            }
        }
    }

    #[test]
    fn leak_ordering_validated() {
        let leak = LeakageSpec::default();
        let l = LaserParams::new(1.0, 0.0);
        let v = InteractionParams::new(0.0);
        let dup = [Level::Zero, Level::One, Level::R, Level::D, Level::D, Level::A];
        assert!(matches!(h_leak_two_atom_ordered(&dup, &leak, &l, &l, &v), Err(Error::Basis(_))));
        assert!(h_leak_two_atom_ordered(&LEVELS[..5], &leak, &l, &l, &v).is_err());
        // a permuted ordering is the same operator in another basis
        let perm = [Level::A, Level::S, Level::D, Level::R, Level::One, Level::Zero];
        let a = h_leak_two_atom(&leak, &l, &l, &InteractionParams::new(2.0));
        let b = h_leak_two_atom_ordered(&perm, &leak, &l, &l, &InteractionParams::new(2.0)).unwrap();
        let rr_perm = 3 * ATOM_DIM + 3;
        assert_eq!(b[(rr_perm, rr_perm)], a[(pair(Level::R, Level::R), pair(Level::R, Level::R))]);
    }

    #[test]
    fn leak_population_matches_two_level_estimate() {
        // single atom, |1⟩ coupled to |d⟩ far off resonance
        let om_d = mhz(1.6);
        let del = mhz(30.0);
        let leak = LeakageSpec { omega_d: om_d, omega_s: 0.0, delta_d: del, delta_s: 0.0 };
        let h = h_leak_atom(&LEVELS, &leak, &LaserParams::new(0.0, 0.0)).unwrap();
        let t = 0.37e-6;
        let psi = propagate_const(&h, &basis_state(ATOM_DIM, Level::One.index()), t).unwrap();
        let p = psi[Level::D.index()].norm_sqr();
        let x = om_d / om_d.hypot(del);
        let y = om_d * t;
        let est = (x * (y / (2.0 * x)).sin()).powi(2);
        assert!((p - est).abs() < 0.2 * est, "{p} vs {est}");
    }

    proptest! {
        #[test]
        fn builders_hermitian(o in 0.0f64..5.0, p in 0.0f64..6.3, d in -5.0f64..5.0, v in -9.0f64..9.0) {
            let l = LaserParams::new(o, d).with_phase(p);
            let lt = LaserParams::new(o * 0.7, -d).with_phase(-p);
            let iv = InteractionParams::new(v);
            let leak = LeakageSpec { omega_d: o, omega_s: 0.5 * o, delta_d: 20.0, delta_s: 10.0 };
            prop_assert!(is_hermitian(&h_single(&l)));
            prop_assert!(is_hermitian(&h_v1(&l, &iv)));
            prop_assert!(is_hermitian(&h_v2(&l, &lt, &iv)));
            prop_assert!(is_hermitian(&h_vt(&lt, &iv)));
            prop_assert!(is_hermitian(&h_vc(&l, &iv)));
            prop_assert!(is_hermitian(&h_leak_two_atom(&leak, &l, &lt, &iv)));
        }

        #[test]
        fn v1_gaps_independent_of_rabi_phase(o in 0.1f64..5.0, d in -5.0f64..5.0, v in -9.0f64..9.0) {
            let iv = InteractionParams::new(v);
            let base = eig_numeric(&h_v1(&LaserParams::new(o, d), &iv)).unwrap().values;
            for phi in [std::f64::consts::FRAC_PI_3, std::f64::consts::PI] {
                let e = eig_numeric(&h_v1(&LaserParams::new(o, d).with_phase(phi), &iv)).unwrap().values;
                for k in 0..3 {
                    prop_assert!((e[k] - base[k]).abs() < 1e-12 * (1.0 + base[k].abs()));
                }
            }
        }
    }
}
