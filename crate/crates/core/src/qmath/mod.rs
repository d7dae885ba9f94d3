//! Dense complex linear algebra, propagators, angular-momentum coefficients
//! and the small optimizers shared by the gate-design modules.

mod angular;
mod eig;
mod optim;
mod propagate;

pub use angular::{clebsch_gordan, clebsch_gordan_exact, wigner_6j, wigner_6j_exact, SqrtRational};
pub use eig::{eig3_shengjin, eig_numeric, EigenSystem, Shengjin};
pub use optim::{golden_section, nelder_mead, NelderMeadOptions};
pub use propagate::{default_dt, propagate_const, propagate_steps, propagator};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// Largest entry modulus.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// max |A − A†|, the quantity the Hermiticity check is based on.
pub fn hermitian_defect(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d
}

pub fn is_hermitian(a: &ComplexMatrix) -> bool {
    hermitian_defect(a) <= 1e-12 * max_abs(a).max(f64::MIN_POSITIVE)
}

/// max |A†A − I|.
pub fn unitarity_defect(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let p = a.adjoint() * a;
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((p[(i, j)] - target).norm());
        }
    }
    d
}

pub fn is_unitary(a: &ComplexMatrix) -> bool {
    unitarity_defect(a) < 1e-10
}

/// Unit vector with a single 1 at `index`.
pub fn basis_state(dim: usize, index: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Diagonal matrix from a list of complex entries.
pub fn diag(entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&StateVector::from_column_slice(entries))
}

/// Kronecker product `a ⊗ b`; the left factor indexes the slow (control) slot.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}
