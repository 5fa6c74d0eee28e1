//! Finite-difference check of a closed-form value function against `F`
//! computed independently by long inner maximization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::inner_ascent::{run_ascent, AscentSchedule};
use crate::oracle::MinimaxOracle;
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub points: usize,
    pub step: f64,
    pub max_grad_error: f64,
    pub max_hess_error: f64,
}

/// `F(x)` from `ceil(50 sqrt(kappa) ln(1e12))` accelerated ascent steps
/// started at `y = 0`.
pub fn value_by_ascent(oracle: &dyn MinimaxOracle, x: &Vector) -> Result<f64> {
    let constants = oracle.constants();
    let schedule = AscentSchedule::new(&constants, 1.0, 1.0)?;
    let n = (50.0 * constants.kappa().sqrt() * 1e12f64.ln()).ceil() as usize;
    let info = run_ascent(oracle, x, &Vector::zeros(oracle.dim_y()), &schedule, n)?;
    Ok(oracle.value(x, &info.y))
}

/// Compares closed-form `grad F` and `hess F` with central differences of
/// [`value_by_ascent`] at `points` points drawn uniformly from `[-1, 1]^n`.
pub fn fd_check(oracle: &dyn MinimaxOracle, points: usize, step: f64, seed: u64) -> Result<FdReport> {
    let cf = oracle
        .closed_form()
        .ok_or_else(|| Error::Precondition("finite-difference check needs a closed-form value function".into()))?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Precondition(format!("step must be positive, got {step}")));
    }
    let n = oracle.dim_x();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FdReport {
        points,
        step,
        max_grad_error: 0.0,
        max_hess_error: 0.0,
    };
    let e = |i: usize| {
        let mut v = Vector::zeros(n);
        v[i] = step;
        v
    };
    for _ in 0..points {
        let x = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let f0 = value_by_ascent(oracle, &x)?;
        let mut plus = Vec::with_capacity(n);
        let mut minus = Vec::with_capacity(n);
        for i in 0..n {
            plus.push(value_by_ascent(oracle, &(&x + e(i)))?);
            minus.push(value_by_ascent(oracle, &(&x - e(i)))?);
        }
        let fd_grad = Vector::from_fn(n, |i, _| (plus[i] - minus[i]) / (2.0 * step));
        report.max_grad_error = report.max_grad_error.max((fd_grad - cf.grad(&x)).amax());

        let mut fd_hess = Matrix::zeros(n, n);
        for i in 0..n {
            fd_hess[(i, i)] = (plus[i] - 2.0 * f0 + minus[i]) / (step * step);
            for j in 0..i {
                let (ei, ej) = (e(i), e(j));
                let pp = value_by_ascent(oracle, &(&x + &ei + &ej))?;
                let pm = value_by_ascent(oracle, &(&x + &ei - &ej))?;
                let mp = value_by_ascent(oracle, &(&x - &ei + &ej))?;
                let mm = value_by_ascent(oracle, &(&x - &ei - &ej))?;
                let v = (pp - pm - mp + mm) / (4.0 * step * step);
                fd_hess[(i, j)] = v;
                fd_hess[(j, i)] = v;
            }
        }
        report.max_hess_error = report.max_hess_error.max((fd_hess - cf.hess(&x)).amax());
    }
    Ok(report)
}
