//! Closure front-ends for the argmin Nelder–Mead and golden-section solvers.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};

struct Closure<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Closure<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(p))
    }
}

struct Scalar<F>(F);

impl<F: Fn(f64) -> f64> CostFunction for Scalar<F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*p))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iters: u64,
    /// Stop once the spread of simplex costs falls below this value.
    pub cost_tolerance: f64,
    /// Number of times the simplex is rebuilt around the incumbent.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_iters: 4000, cost_tolerance: 1e-30, restarts: 2 }
    }
}

/// Minimizes `f` from `x0`, building the initial simplex with per-axis `steps`.
pub fn nelder_mead<F>(f: F, x0: &[f64], steps: &[f64], opts: NelderMeadOptions) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    if x0.len() != steps.len() || x0.is_empty() {
        return Err(Error::DimensionMismatch { expected: x0.len(), got: steps.len() });
    }
    let problem = Closure(f);
    let mut best = x0.to_vec();
    let mut best_cost = (problem.0)(&best);
    let mut scale = 1.0;
    for _ in 0..=opts.restarts {
        let mut simplex = vec![best.clone()];
        for (k, s) in steps.iter().enumerate() {
            let mut p = best.clone();
            p[k] += s * scale;
            simplex.push(p);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(opts.cost_tolerance)
            .map_err(|e| Error::param("cost_tolerance", e.to_string()))?;
        let res = Executor::new(Closure(&problem.0), solver)
            .configure(|s| s.max_iters(opts.max_iters))
            .run()
            .map_err(|e| Error::Domain(e.to_string()))?;
        let state = res.state();
        if let (Some(p), c) = (state.get_best_param(), state.get_best_cost()) {
            if c <= best_cost {
                best = p.clone();
                best_cost = c;
            }
        }
        scale *= 0.1;
    }
    Ok((best, best_cost))
}

/// Golden-section minimization of `f` on `[lo, hi]` starting from `init`.
pub fn golden_section<F>(f: F, lo: f64, hi: f64, init: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let solver = GoldenSectionSearch::new(lo, hi)
        .and_then(|s| s.with_tolerance(tol))
        .map_err(|e| Error::param("bounds", e.to_string()))?;
    let res = Executor::new(Scalar(f), solver)
        .configure(|s| s.param(init).max_iters(500))
        .run()
        .map_err(|e| Error::Domain(e.to_string()))?;
    let state = res.state();
    let x = *state.get_best_param().ok_or_else(|| Error::Domain("golden section produced no iterate".into()))?;
    Ok((x, state.get_best_cost()))
}
