use std::f64::consts::FRAC_PI_3;

use nalgebra::DVector;

use super::{hermitian_defect, is_hermitian, ComplexMatrix, StateVector, C64};
use crate::error::{Error, Result};

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> StateVector {
        self.vectors.column(k).into_owned()
    }

    /// `exp(-i H t)` assembled from the spectral decomposition.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let phases = DVector::from_iterator(
            self.dim(),
            self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)),
        );
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t) ψ` without forming the full propagator.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> StateVector {
        let mut coeffs = self.vectors.ad_mul(psi);
        for (k, z) in coeffs.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -self.values[k] * t);
        }
        &self.vectors * coeffs
    }
}

/// Hermitian eigendecomposition with a deterministic ordering: ascending
/// eigenvalues, and every eigenvector rotated so its first significant
/// component is real and positive.
pub fn eig_numeric(h: &ComplexMatrix) -> Result<EigenSystem> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: h.ncols() });
    }
    if !is_hermitian(h) {
        return Err(Error::NotHermitian(hermitian_defect(h)));
    }
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().copied().find(|z| z.norm() > 1e-8).unwrap_or(C64::new(1.0, 0.0));
        let rot = pivot.conj() / pivot.norm();
        vectors.set_column(dst, &(col * rot));
    }
    Ok(EigenSystem { values, vectors })
}

/// Closed-form roots of the 3×3 blockade Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shengjin {
    /// (ε1, ε2, ε3) in the order of the closed-form expressions.
    pub roots: [f64; 3],
    /// Set when 𝒜 vanishes and the three roots coincide.
    pub degenerate: bool,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl Shengjin {
    pub fn sorted(&self) -> [f64; 3] {
        let mut r = self.roots;
        r.sort_by(f64::total_cmp);
        r
    }
}

/// Eigenvalues of `[[V+2Δ, Ω/√2, 0], [Ω*/√2, Δ, Ω/√2], [0, Ω*/√2, 0]]`
/// from the trigonometric cubic solution.
///
/// Only |Ω| enters. The discriminant term is 𝒜² = V² + 3(|Ω|² + Δ² + VΔ),
/// which follows from the characteristic polynomial.
pub fn eig3_shengjin(omega_abs: f64, delta: f64, v: f64) -> Shengjin {
    let o2 = omega_abs * omega_abs;
    let a2 = v * v + 3.0 * (o2 + delta * delta + v * delta);
    let a = a2.max(0.0).sqrt();
    let b = 27.0 * o2 * (v / 2.0 + delta) + 9.0 * (v + 3.0 * delta) * (2.0 * delta * delta + v * delta - o2)
        - 2.0 * (v + 3.0 * delta).powi(3);
    let scale = o2.sqrt().max(delta.abs()).max(v.abs());
    if a <= 1e-12 * scale || a == 0.0 {
        let e = delta + v / 3.0;
        return Shengjin { roots: [e; 3], degenerate: true, a, b, theta: 0.0 };
    }
    let arg = b / (2.0 * a * a * a);
    debug_assert!(arg.abs() <= 1.0 + 1e-9, "arccos argument {arg} out of range");
    let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
    let roots = [
        delta + (v - 2.0 * a * theta.cos()) / 3.0,
        delta + (v + 2.0 * a * (theta + FRAC_PI_3).cos()) / 3.0,
        delta + (v + 2.0 * a * (theta - FRAC_PI_3).cos()) / 3.0,
    ];
    Shengjin { roots, degenerate: false, a, b, theta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{basis_state, c, max_abs, ComplexMatrix};
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn hv1(o: C64, d: f64, v: f64) -> ComplexMatrix {
        let s = o / SQRT_2;
        ComplexMatrix::from_row_slice(
            3,
            3,
            &[c(v + 2.0 * d, 0.0), s, c(0.0, 0.0), s.conj(), c(d, 0.0), s, c(0.0, 0.0), s.conj(), c(0.0, 0.0)],
        )
    }

    fn check_system(h: &ComplexMatrix, es: &EigenSystem) {
        let norm = max_abs(h).max(1e-300) * h.nrows() as f64;
        for k in 0..es.dim() {
            let v = es.vector(k);
            let r = h * &v - &v * C64::new(es.values[k], 0.0);
            assert!(r.norm() < 1e-10 * norm);
        }
        let g = es.vectors.adjoint() * &es.vectors;
        for i in 0..es.dim() {
            for j in 0..es.dim() {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - t).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_spectrum() {
        let es = eig_numeric(&ComplexMatrix::identity(4, 4)).unwrap();
        assert!(es.values.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn symmetric_two_level() {
        let om = 3.0;
        let h = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(om / 2.0, 0.0), c(om / 2.0, 0.0), c(0.0, 0.0)]);
        let es = eig_numeric(&h).unwrap();
        assert!((es.values[0] + om / 2.0).abs() < 1e-14);
        assert!((es.values[1] - om / 2.0).abs() < 1e-14);
        check_system(&h, &es);
    }

    #[test]
    fn detuned_two_level_quadratic() {
        let (om, d) = (2.0, 1.3);
        let h = ComplexMatrix::from_row_slice(2, 2, &[c(d, 0.0), c(om / 2.0, 0.0), c(om / 2.0, 0.0), c(0.0, 0.0)]);
        let es = eig_numeric(&h).unwrap();
        let r = (om * om + d * d).sqrt();
        assert!((es.values[0] - (d - r) / 2.0).abs() < 1e-14);
        assert!((es.values[1] - (d + r) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(eig_numeric(&h), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn phase_convention_first_component_positive() {
        let h = hv1(c(0.3, 0.7), 0.4, -1.2);
        let es = eig_numeric(&h).unwrap();
        for k in 0..3 {
            let first = es.vectors.column(k).iter().copied().find(|z| z.norm() > 1e-8).unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn shengjin_diagonal_case() {
        let s = eig3_shengjin(0.0, 1.5, -4.0);
        let mut want = [-4.0 + 3.0, 1.5, 0.0];
        want.sort_by(f64::total_cmp);
        let got = s.sorted();
        for k in 0..3 {
            assert!((got[k] - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn shengjin_degenerate_flag() {
        let s = eig3_shengjin(0.0, 0.0, 0.0);
        assert!(s.degenerate);
        assert_eq!(s.roots, [0.0; 3]);
    }

    #[test]
    fn shengjin_table_row() {
        let tw = 2.0 * std::f64::consts::PI * 1e6;
        let (o, d, v) = (10.0 * tw, 19.252 * tw, -35.1818 * tw);
        let got = eig3_shengjin(o, d, v).sorted();
        let es = eig_numeric(&hv1(c(o, 0.0), d, v)).unwrap();
        for k in 0..3 {
            assert!((got[k] - es.values[k]).abs() < 1e-10 * es.values[2].abs().max(es.values[0].abs()));
        }
    }

    #[test]
    fn propagator_matches_evolve() {
        let h = hv1(c(1.0, 0.2), 0.5, 2.0);
        let es = eig_numeric(&h).unwrap();
        let psi = basis_state(3, 2);
        let a = es.propagator(0.7) * &psi;
        let b = es.evolve(&psi, 0.7);
        assert!((a - b).norm() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn shengjin_equals_numeric(o in -20.0f64..20.0, phi in 0.0f64..6.3, d in -40.0f64..40.0, v in -80.0f64..80.0) {
            let om = C64::from_polar(o.abs(), phi);
            let h = hv1(om, d, v);
            let es = eig_numeric(&h).unwrap();
            let s = eig3_shengjin(o.abs(), d, v);
            let got = s.sorted();
            let scale = es.values.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-12);
            for k in 0..3 {
                prop_assert!((got[k] - es.values[k]).abs() <= 1e-10 * scale);
            }
            let trace: f64 = s.roots.iter().sum();
            prop_assert!((trace - (v + 3.0 * d)).abs() <= 1e-10 * scale.max((v + 3.0 * d).abs()));
        }

        #[test]
        fn numeric_invariants_random_hermitian(seed in proptest::collection::vec(-5.0f64..5.0, 72)) {
            let n = 6;
            let mut h = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] = c(seed[2 * (i * n + j)], seed[2 * (i * n + j) + 1]);
                }
            }
            let h = (&h + h.adjoint()) * c(0.5, 0.0);
            let es = eig_numeric(&h).unwrap();
            prop_assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
            check_system(&h, &es);
        }
    }
}
