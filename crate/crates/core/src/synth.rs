//! Single-qubit gate algebra and the constructions of CZ from the
//! controlled-phase gates `U₁` and `U₂`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{c, diag, golden_section, is_unitary, kron, ComplexMatrix, C64, I};
use crate::units::angle_diff;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis([f64; 3]);

impl Axis {
    pub const X: Axis = Axis([1.0, 0.0, 0.0]);
    pub const Y: Axis = Axis([0.0, 1.0, 0.0]);
    pub const Z: Axis = Axis([0.0, 0.0, 1.0]);

    /// Accepts a vector whose norm is 1 to within 1e−12.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = norm(v);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::param("axis", format!("norm {n} is not 1")));
        }
        Ok(Axis(v))
    }

    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let n = norm(v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::param("axis", "zero or non-finite vector"));
        }
        Ok(Axis(v.map(|x| x / n)))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, o: &Axis) -> f64 {
        dot(self.0, o.0)
    }
}

fn norm(v: [f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleQubitGate {
    pub matrix: ComplexMatrix,
    pub label: String,
}

impl SingleQubitGate {
    pub fn adjoint(&self) -> SingleQubitGate {
        SingleQubitGate { matrix: self.matrix.adjoint(), label: format!("{}†", self.label) }
    }
}

pub fn pauli() -> [ComplexMatrix; 3] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    [
        ComplexMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        ComplexMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        ComplexMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// `n·σ`.
pub fn axis_operator(n: &Axis) -> ComplexMatrix {
    let [sx, sy, sz] = pauli();
    let [x, y, z] = n.0;
    sx * c(x, 0.0) + sy * c(y, 0.0) + sz * c(z, 0.0)
}

/// `diag(1, e^{iφ})`.
pub fn phase_gate(phi: f64) -> SingleQubitGate {
    SingleQubitGate { matrix: diag(&[c(1.0, 0.0), C64::from_polar(1.0, phi)]), label: format!("P({phi})") }
}

/// `exp(−iθ n·σ/2) = cos(θ/2) I − i sin(θ/2) n·σ`.
pub fn rotation_gate(n: &Axis, theta: f64) -> SingleQubitGate {
    let (s, co) = (0.5 * theta).sin_cos();
    let m = ComplexMatrix::identity(2, 2) * c(co, 0.0) - axis_operator(n) * c(0.0, s);
    SingleQubitGate { matrix: m, label: format!("R({:?}, {theta})", n.0) }
}

/// `O₁ = P_{−β/2} ⊗ P_{−α}` and `O₂ = P_{−β} ⊗ P_{−2α}` (control first).
pub fn o1_o2(alpha: f64, beta: f64) -> (ComplexMatrix, ComplexMatrix) {
    let o1 = kron(&phase_gate(-beta / 2.0).matrix, &phase_gate(-alpha).matrix);
    let o2 = kron(&phase_gate(-beta).matrix, &phase_gate(-2.0 * alpha).matrix);
    (o1, o2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Two `O₁U₁` conjugated into a controlled π/2 − θ rotation, completed by `O₂U₁²`.
    FourGate,
    /// Two `O₁U₁` conjugated directly into a controlled π rotation; needs |θ| ≥ π/2.
    TwoGate,
}

impl Regime {
    /// Picks the regime from θ = β − 2α reduced to (−π, π].
    pub fn select(alpha: f64, beta: f64) -> Regime {
        if angle_diff(beta - 2.0 * alpha, 0.0).abs() >= FRAC_PI_2 {
            Regime::TwoGate
        } else {
            Regime::FourGate
        }
    }
}

/// Single-qubit corrections `A = R_y(θ₁)` and `B = R_y(−θ₂) R_z(−θ₃)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbSolution {
    pub regime: Regime,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub a: f64,
    pub n2: Axis,
    pub n12: Axis,
}

impl AbSolution {
    pub fn a_gate(&self) -> SingleQubitGate {
        rotation_gate(&Axis::Y, self.theta1)
    }

    /// Maps `n₁₂·σ` to `σ₃` under conjugation.
    pub fn b_gate(&self) -> SingleQubitGate {
        let m = rotation_gate(&Axis::Y, -self.theta2).matrix * rotation_gate(&Axis::Z, -self.theta3).matrix;
        SingleQubitGate { matrix: m, label: "B".into() }
    }

    /// Rotation angle of `R_z(θ) R_{n₂}(θ)` about `n₁₂`.
    pub fn combined_angle(&self, theta: f64) -> f64 {
        match self.regime {
            Regime::FourGate => PI - 2.0 * theta,
            Regime::TwoGate => PI,
        }
    }
}

fn solve_for(theta: f64, regime: Regime) -> Result<AbSolution> {
    let (s, co) = (0.5 * theta).sin_cos();
    let (a, half) = match regime {
        Regime::FourGate => ((co * co - theta.sin()) / (s * s), FRAC_PI_2 - theta),
        Regime::TwoGate => ((co / s).powi(2), FRAC_PI_2),
    };
    if a.abs() > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("|a| = {} > 1; no rotation axis n2 exists", a.abs())));
    }
    let a = a.clamp(-1.0, 1.0);
    let n2 = [(1.0 - a * a).sqrt(), 0.0, a];
    let z = [0.0, 0.0, 1.0];
    let x = cross(z, n2);
    let sh = half.sin();
    let n12 = Axis::normalized(std::array::from_fn(|k| (s * co * (z[k] + n2[k]) + s * s * x[k]) / sh))?;
    let [nx, ny, nz] = n12.0;
    Ok(AbSolution {
        regime,
        theta1: a.acos(),
        theta2: nz.clamp(-1.0, 1.0).acos(),
        theta3: ny.atan2(nx),
        a,
        n2: Axis::normalized(n2)?,
        n12,
    })
}

/// Four-gate corrections for θ = β − 2α.
///
/// Valid only for θ/2 (reduced) in (−π/2, π/2) outside (−3π/8, π/8) and
/// |θ| < π/2; the remaining angles belong to the two-gate construction.
pub fn solve_ab(alpha: f64, beta: f64) -> Result<AbSolution> {
    let theta = angle_diff(beta - 2.0 * alpha, 0.0);
    if theta.abs() >= FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "β−2α = {:.6}π has |β−2α| ≥ π/2: use the two-gate construction",
            theta / PI
        )));
    }
    let h = 0.5 * theta;
    if h > -3.0 * FRAC_PI_8 && h < FRAC_PI_8 {
        return Err(Error::Domain(format!(
            "β/2−α = {:.6}π lies in (−3π/8, π/8), outside the four-gate window",
            h / PI
        )));
    }
    solve_for(theta, Regime::FourGate)
}

/// Two-gate corrections (`a′ = cot²(θ/2)`) for |β − 2α| ≥ π/2.
pub fn solve_ab_two_gate(alpha: f64, beta: f64) -> Result<AbSolution> {
    let theta = angle_diff(beta - 2.0 * alpha, 0.0);
    if theta.abs() < FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "β−2α = {:.6}π has |β−2α| < π/2: use the four-gate construction",
            theta / PI
        )));
    }
    solve_for(theta, Regime::TwoGate)
}

/// Solution for whichever regime θ = β − 2α falls in.
pub fn solve_auto(alpha: f64, beta: f64) -> Result<AbSolution> {
    match Regime::select(alpha, beta) {
        Regime::FourGate => solve_ab(alpha, beta),
        Regime::TwoGate => solve_ab_two_gate(alpha, beta),
    }
}

fn on_target(g: &ComplexMatrix) -> ComplexMatrix {
    kron(&ComplexMatrix::identity(2, 2), g)
}

fn check_4x4(u: &ComplexMatrix) -> Result<()> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: u.nrows().max(u.ncols()) });
    }
    Ok(())
}

/// `D = [I⊗B][O₁U₁ (I⊗A) O₁U₁ (I⊗A†)][I⊗B†]`.
pub fn d_sequence(u1: &ComplexMatrix, alpha: f64, beta: f64, sol: &AbSolution) -> ComplexMatrix {
    let (o1, _) = o1_o2(alpha, beta);
    let g = o1 * u1;
    let a = on_target(&sol.a_gate().matrix);
    let b = on_target(&sol.b_gate().matrix);
    &b * &g * &a * &g * a.adjoint() * b.adjoint()
}

/// Everything before the final control phase gate `P_{π/2} ⊗ I`.
pub fn compose_core_u1(u1: &ComplexMatrix, alpha: f64, beta: f64) -> Result<ComplexMatrix> {
    check_4x4(u1)?;
    let sol = solve_auto(alpha, beta)?;
    let d = d_sequence(u1, alpha, beta, &sol);
    Ok(match sol.regime {
        Regime::TwoGate => d,
        Regime::FourGate => {
            let (_, o2) = o1_o2(alpha, beta);
            d * o2 * u1 * u1
        }
    })
}

/// `[P_{π/2}⊗I] D (O₂U₁²)` in the four-gate regime, `[P_{π/2}⊗I] D` in the
/// two-gate regime, chosen from |β − 2α| against π/2.
pub fn compose_cz_u1(u1: &ComplexMatrix, alpha: f64, beta: f64) -> Result<ComplexMatrix> {
    let core = compose_core_u1(u1, alpha, beta)?;
    Ok(kron(&phase_gate(FRAC_PI_2).matrix, &ComplexMatrix::identity(2, 2)) * core)
}

/// `[P_{−2φ₁₀}]_c ⊗ [P_{−2φ₀₁}]_t U₂²`, where `φ₀₁` and `φ₁₀` are the
/// phases `U₂` gives `|01⟩` and `|10⟩`.
pub fn compose_cz_u2(u2: &ComplexMatrix, phase_01: f64, phase_10: f64) -> Result<ComplexMatrix> {
    check_4x4(u2)?;
    let corr = kron(&phase_gate(-2.0 * phase_10).matrix, &phase_gate(-2.0 * phase_01).matrix);
    Ok(corr * u2 * u2)
}

/// `[P_{π/2} ⊗ R_y(π/2)] · core · [I ⊗ R_y(−π/2)]`.
pub fn cnot_from_core(core: &ComplexMatrix) -> ComplexMatrix {
    let ry = rotation_gate(&Axis::Y, FRAC_PI_2).matrix;
    kron(&phase_gate(FRAC_PI_2).matrix, &ry) * core * on_target(&ry.adjoint())
}

pub fn cz() -> ComplexMatrix {
    diag(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
}

pub fn cnot() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(i, j)] = c(1.0, 0.0);
    }
    m
}

fn spectral_norm(m: &ComplexMatrix) -> f64 {
    m.clone().singular_values().max()
}

/// `min_φ ‖U − e^{iφ}W‖₂`.
///
/// The trace-overlap phase `arg Tr(W†U)` seeds the search but is not the
/// operator-norm optimum in general (CZ against I gives 2 there, √2 at the
/// optimum), so a coarse scan plus golden-section refinement follows.
pub fn gate_distance(u: &ComplexMatrix, w: &ComplexMatrix) -> f64 {
    let f = |phi: f64| spectral_norm(&(u - w * C64::from_polar(1.0, phi)));
    let seed = (w.adjoint() * u).trace().arg();
    const SCAN: usize = 64;
    let step = TAU / SCAN as f64;
    let mut best = (seed, f(seed));
    for k in 0..SCAN {
        let phi = k as f64 * step;
        let v = f(phi);
        if v < best.1 {
            best = (phi, v);
        }
    }
    let (lo, hi) = (best.0 - step, best.0 + step);
    match golden_section(f, lo, hi, best.0, 1e-12) {
        Ok((_, v)) if v < best.1 => v,
        _ => best.1,
    }
}

/// `‖U†U − I‖` small enough for the composite invariants.
pub fn assert_unitary(u: &ComplexMatrix) -> Result<()> {
    if is_unitary(u) {
        Ok(())
    } else {
        Err(Error::Domain("matrix is not unitary".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_u1::GateDesignU1;
    use crate::design_u2::GateDesignU2;
    use crate::fixtures::{TABLE1, TABLE2};
    use crate::qmath::max_abs;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn ideal_u1(alpha: f64, beta: f64) -> ComplexMatrix {
        diag(&[c(1.0, 0.0), C64::from_polar(1.0, alpha), C64::from_polar(1.0, alpha), C64::from_polar(1.0, beta)])
    }

    fn scan_distance(u: &ComplexMatrix, w: &ComplexMatrix, n: usize) -> f64 {
        (0..n)
            .map(|k| spectral_norm(&(u - w * C64::from_polar(1.0, TAU * k as f64 / n as f64))))
            .fold(f64::INFINITY, f64::min)
    }

    fn control_one_block(m: &ComplexMatrix) -> ComplexMatrix {
        m.view((2, 2), (2, 2)).into_owned()
    }

    #[test]
    fn basic_gates() {
        assert!(max_abs(&(phase_gate(0.0).matrix - ComplexMatrix::identity(2, 2))) < 1e-15);
        let r = rotation_gate(&Axis::Z, TAU).matrix;
        assert!(max_abs(&(r + ComplexMatrix::identity(2, 2))) < 1e-15);
        for n in [Axis::X, Axis::Y, Axis::Z, Axis::normalized([1.0, -2.0, 0.5]).unwrap()] {
            assert!(is_unitary(&rotation_gate(&n, 0.7).matrix));
        }
        assert!(Axis::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        let n = Axis::normalized([0.3, -0.4, 0.8]).unwrap();
        let theta = 1.234;
        let h = axis_operator(&n) * c(theta / 2.0, 0.0);
        let es = crate::qmath::eig_numeric(&h).unwrap();
        assert!(max_abs(&(es.propagator(1.0) - rotation_gate(&n, theta).matrix)) < 1e-13);
    }

    #[test]
    fn y_rotation_tilts_sigma_z() {
        let [s1, _, s3] = pauli();
        let t1 = 0.9;
        let a = rotation_gate(&Axis::Y, t1).matrix;
        let lhs = &a * &s3 * a.adjoint();
        let rhs = s3 * c(t1.cos(), 0.0) + s1 * c((1.0 - t1.cos().powi(2)).sqrt(), 0.0);
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
    }

    #[test]
    fn o_gates_make_controlled_rotations() {
        let (alpha, beta) = (0.37, -1.21);
        let u1 = ideal_u1(alpha, beta);
        let (o1, o2) = o1_o2(alpha, beta);
        let g1 = &o1 * &u1;
        let g2 = &o2 * &u1 * &u1;
        let r1 = rotation_gate(&Axis::Z, beta - 2.0 * alpha).matrix;
        let r2 = rotation_gate(&Axis::Z, 2.0 * (beta - 2.0 * alpha)).matrix;
        let id = ComplexMatrix::identity(2, 2);
        assert!(max_abs(&(g1.view((0, 0), (2, 2)) - &id)) < 1e-15);
        assert!(max_abs(&(control_one_block(&g1) - r1)) < 1e-14);
        assert!(max_abs(&(control_one_block(&g2) - r2)) < 1e-14);
        let (i1, i2) = o1_o2(0.0, 0.0);
        assert!(max_abs(&(i1 - ComplexMatrix::identity(4, 4))) < 1e-15);
        assert!(max_abs(&(i2 - ComplexMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn solve_ab_identities() {
        let theta = 0.32457 * PI;
        let (alpha, beta) = (0.4, 0.8 + theta);
        let sol = solve_ab(alpha, beta).unwrap();
        let a = sol.a_gate().matrix;
        let rn2 = rotation_gate(&sol.n2, theta).matrix;
        let conj = &a * rotation_gate(&Axis::Z, theta).matrix * a.adjoint();
        assert!(gate_distance(&rn2, &conj) < 1e-9);
        let h = 0.5 * theta;
        let lhs = (FRAC_PI_2 - theta).cos();
        assert!((lhs - (h.cos().powi(2) - h.sin().powi(2) * sol.n2.dot(&Axis::Z))).abs() < 1e-12);
        let b = sol.b_gate().matrix;
        let mapped = &b * axis_operator(&sol.n12) * b.adjoint();
        assert!(max_abs(&(mapped - axis_operator(&Axis::Z))) < 1e-12);
    }

    #[test]
    fn d_is_controlled_rotation_about_n12() {
        let (alpha, beta) = (-0.2, -0.4 + 0.35 * PI);
        let sol = solve_ab(alpha, beta).unwrap();
        let theta = beta - 2.0 * alpha;
        let inner = {
            let (o1, _) = o1_o2(alpha, beta);
            let g = o1 * ideal_u1(alpha, beta);
            let a = on_target(&sol.a_gate().matrix);
            &g * &a * &g * a.adjoint()
        };
        let want = rotation_gate(&sol.n12, -2.0 * (-FRAC_PI_2 + theta)).matrix;
        assert!(max_abs(&(control_one_block(&inner) - want)) < 1e-12);
        assert!(max_abs(&(inner.view((0, 0), (2, 2)) - ComplexMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn regime_errors_are_named() {
        let msg = solve_ab(0.0, 0.7 * PI).unwrap_err().to_string();
        assert!(msg.contains("two-gate"), "{msg}");
        let msg = solve_ab(0.0, 0.1 * PI).unwrap_err().to_string();
        assert!(msg.contains("window"), "{msg}");
        let msg = solve_ab_two_gate(0.0, 0.3 * PI).unwrap_err().to_string();
        assert!(msg.contains("four-gate"), "{msg}");
    }

    #[test]
    fn table1_composites() {
        for (k, regime) in [(0, Regime::FourGate), (1, Regime::TwoGate), (2, Regime::TwoGate)] {
            let r = TABLE1[k];
            let d = GateDesignU1::from_mhz(r.omega_mhz, r.delta_mhz, r.v_mhz, r.n).unwrap();
            let (alpha, beta) = (d.alpha_propagated().unwrap(), d.beta_propagated().unwrap());
            assert_eq!(Regime::select(alpha, beta), regime);
            let u = d.gate_matrix().unwrap();
            let comp = compose_cz_u1(&u, alpha, beta).unwrap();
            assert!(gate_distance(&comp, &cz()) < 1e-6, "case {}: {}", r.case, gate_distance(&comp, &cz()));
            let core = compose_core_u1(&u, alpha, beta).unwrap();
            assert!(gate_distance(&cnot_from_core(&core), &cnot()) < 1e-6);
        }
    }

    #[test]
    fn table2_composites() {
        for k in [0, 3] {
            let r = TABLE2[k];
            let d = GateDesignU2::from_mhz(r.omega_c_mhz, r.delta_c_mhz, r.omega_t_mhz, r.delta_t_mhz, r.v_mhz, r.nc, r.nt)
                .unwrap();
            let comp = compose_cz_u2(&d.gate_matrix().unwrap(), d.gamma, d.alpha).unwrap();
            let dist = gate_distance(&comp, &cz());
            assert!(dist < 1e-4, "case {}: {dist}", r.case);
            let mismatch = angle_diff(d.entangling_angle(), d.sign as f64 * FRAC_PI_2).abs();
            assert!(dist <= 2.0 * mismatch + 4.0 * d.e_ro.sqrt());
        }
    }

    #[test]
    fn ideal_u2_gives_cz() {
        let u2 = diag(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), C64::from_polar(1.0, FRAC_PI_2)]);
        let comp = compose_cz_u2(&u2, 0.0, 0.0).unwrap();
        assert!(max_abs(&(comp - cz())) < 1e-15);
        assert!(compose_cz_u2(&ComplexMatrix::identity(2, 2), 0.0, 0.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let id = ComplexMatrix::identity(4, 4);
        assert!(gate_distance(&id, &id) < 1e-15);
        let u = cnot();
        assert!(gate_distance(&u, &(&u * C64::from_polar(1.0, 0.3))) < 1e-12);
        let d = gate_distance(&cz(), &id);
        let scanned = scan_distance(&cz(), &id, 10_000);
        assert!(d > 0.0 && (d - scanned).abs() < 1e-6 && d <= scanned + 1e-12);
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn ideal_composites_are_cz(alpha in -PI..PI, h in 0.0f64..1.0, four in any::<bool>(), neg in any::<bool>()) {
            // four-gate: θ ∈ [π/4, π/2); two-gate: |θ| ∈ [π/2, π)
            let theta = if four {
                FRAC_PI_4 + h * (FRAC_PI_4 - 1e-3)
            } else {
                let t = FRAC_PI_2 + h * (FRAC_PI_2 - 1e-3);
                if neg { -t } else { t }
            };
            let beta = 2.0 * alpha + theta;
            let comp = compose_cz_u1(&ideal_u1(alpha, beta), alpha, beta).unwrap();
            prop_assert!(is_unitary(&comp));
            prop_assert!(gate_distance(&comp, &cz()) < 1e-9);
        }

        #[test]
        fn distance_matches_scan(a in -PI..PI, b in -PI..PI, g in -PI..PI) {
            let u = diag(&[c(1.0, 0.0), C64::from_polar(1.0, a), C64::from_polar(1.0, b), C64::from_polar(1.0, g)]);
            let d = gate_distance(&u, &cz());
            let s = scan_distance(&u, &cz(), 2000);
            prop_assert!(d <= s + 1e-12 && s - d < 1e-2);
        }
    }
}
