//! Clebsch–Gordan coefficients and Wigner 6-j symbols from the Racah sums,
//! evaluated in exact rational arithmetic.
//!
//! Angular momenta are passed either as `f64` half-integers or, in the `*_exact`
//! forms, as doubled integers (`2j`, `2m`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact value `coef · √radicand` with `radicand ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtRational {
    pub coef: BigRational,
    pub radicand: BigRational,
}

impl SqrtRational {
    pub fn zero() -> Self {
        SqrtRational { coef: BigRational::zero(), radicand: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero() || self.radicand.is_zero()
    }

    /// Exact square, always rational.
    pub fn square(&self) -> BigRational {
        &self.coef * &self.coef * &self.radicand
    }

    pub fn mul(&self, other: &SqrtRational) -> SqrtRational {
        SqrtRational { coef: &self.coef * &other.coef, radicand: &self.radicand * &other.radicand }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let c = ratio_f64(&self.coef);
        c * ratio_f64(&self.radicand).sqrt()
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerator and denominator: scale down by shifting both.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900);
        let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
        n / d
    })
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Factorial of `twice / 2`; `None` when the argument is negative or odd.
fn half_fact(twice: i64) -> Option<BigInt> {
    if twice < 0 || twice % 2 != 0 {
        None
    } else {
        Some(factorial(twice / 2))
    }
}

fn frac(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

fn triangle_ok(a: i64, b: i64, c: i64) -> bool {
    a >= 0 && b >= 0 && c >= 0 && (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

fn projection_ok(j: i64, m: i64) -> bool {
    m.abs() <= j && (j + m) % 2 == 0
}

/// Triangle coefficient Δ(abc)² as a rational, arguments doubled.
fn triangle_coef(a: i64, b: i64, c: i64) -> BigRational {
    let num = half_fact(a + b - c).unwrap() * half_fact(a - b + c).unwrap() * half_fact(-a + b + c).unwrap();
    frac(num, half_fact(a + b + c + 2).unwrap())
}

/// ⟨j1 m1; j2 m2 | J M⟩ with every argument doubled.
pub fn clebsch_gordan_exact(j1: i64, m1: i64, j2: i64, m2: i64, jj: i64, mm: i64) -> SqrtRational {
    if mm != m1 + m2
        || !triangle_ok(j1, j2, jj)
        || !projection_ok(j1, m1)
        || !projection_ok(j2, m2)
        || !projection_ok(jj, mm)
    {
        return SqrtRational::zero();
    }
    let pre = BigRational::from_integer(BigInt::from(jj + 1)) * triangle_coef(j1, j2, jj);
    let proj = [jj + mm, jj - mm, j1 - m1, j1 + m1, j2 - m2, j2 + m2]
        .iter()
        .fold(BigInt::one(), |acc, &x| acc * half_fact(x).unwrap());
    let radicand = pre * BigRational::from_integer(proj);

    // Summation index k (undoubled) over all nonnegative factorial arguments.
    let a = [j1 + j2 - jj, j1 - m1, j2 + m2];
    let b = [jj - j2 + m1, jj - j1 - m2];
    let k_min = b.iter().map(|&x| (-x).max(0) / 2).max().unwrap_or(0);
    let k_max = a.iter().map(|&x| x / 2).min().unwrap_or(0);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let k2 = 2 * k;
        let den = factorial(k)
            * half_fact(a[0] - k2).unwrap()
            * half_fact(a[1] - k2).unwrap()
            * half_fact(a[2] - k2).unwrap()
            * half_fact(b[0] + k2).unwrap()
            * half_fact(b[1] + k2).unwrap();
        let term = frac(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    SqrtRational { coef: sum, radicand }
}

/// {j1 j2 j3; j4 j5 j6} with every argument doubled.
pub fn wigner_6j_exact(j1: i64, j2: i64, j3: i64, j4: i64, j5: i64, j6: i64) -> SqrtRational {
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if !triads.iter().all(|&(a, b, c)| triangle_ok(a, b, c)) {
        return SqrtRational::zero();
    }
    let radicand = triads.iter().fold(BigRational::one(), |acc, &(a, b, c)| acc * triangle_coef(a, b, c));
    let alphas: Vec<i64> = triads.iter().map(|&(a, b, c)| (a + b + c) / 2).collect();
    let betas = [(j1 + j2 + j4 + j5) / 2, (j2 + j3 + j5 + j6) / 2, (j3 + j1 + j6 + j4) / 2];
    let t_min = *alphas.iter().max().unwrap();
    let t_max = *betas.iter().min().unwrap();
    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let den = alphas.iter().fold(BigInt::one(), |acc, &a| acc * factorial(t - a))
            * betas.iter().fold(BigInt::one(), |acc, &b| acc * factorial(b - t));
        let term = frac(factorial(t + 1), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    SqrtRational { coef: sum, radicand }
}

fn doubled(x: f64) -> Option<i64> {
    let d = (2.0 * x).round();
    ((2.0 * x - d).abs() < 1e-9).then_some(d as i64)
}

/// ⟨j1 m1; j2 m2 | J M⟩. Arguments that are not half-integers, or that break
/// a triangle or projection rule, give 0.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, jj: f64, mm: f64) -> f64 {
    match [j1, m1, j2, m2, jj, mm].map(doubled) {
        [Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)] => clebsch_gordan_exact(a, b, c, d, e, f).to_f64(),
        _ => 0.0,
    }
}

/// {j1 j2 j3; j4 j5 j6}, zero outside the triangle rules.
pub fn wigner_6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> f64 {
    match [j1, j2, j3, j4, j5, j6].map(doubled) {
        [Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)] => wigner_6j_exact(a, b, c, d, e, f).to_f64(),
        _ => 0.0,
    }
}
