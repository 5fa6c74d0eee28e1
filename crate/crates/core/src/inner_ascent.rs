//! Accelerated gradient ascent on `y` and the iteration-count schedule that
//! makes `g_t` and `H_t` accurate to `eps1` and `eps2`.

use crate::oracle::{MinimaxOracle, SchurOperator, SmoothnessConstants, DEFAULT_YY_TOL};
use crate::{Error, Result, Vector};

/// `||y_i||` above this aborts the ascent.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Step sizes and iteration counts of the inner ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentSchedule {
    pub kappa: f64,
    /// Gradient step `1 / ell1`.
    pub eta1: f64,
    /// Momentum `(sqrt(kappa) - 1) / (sqrt(kappa) + 1)`.
    pub eta2: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Target distance `A = min(eps1 / ell1, eps2 / (2 L_H))` to `y*(x_t)`.
    pub a: f64,
    pub n_cap: usize,
}

impl AscentSchedule {
    pub fn new(constants: &SmoothnessConstants, eps1: f64, eps2: f64) -> Result<Self> {
        if !(eps1 > 0.0 && eps2 > 0.0) {
            return Err(Error::Precondition(format!(
                "eps1 and eps2 must be positive, got {eps1}, {eps2}"
            )));
        }
        let lh = constants.lh();
        let a_hess = if lh > 0.0 { eps2 / (2.0 * lh) } else { f64::INFINITY };
        let a = (eps1 / constants.ell1()).min(a_hess);
        let kappa = constants.kappa();
        Ok(Self {
            kappa,
            eta1: 1.0 / constants.ell1(),
            eta2: momentum(kappa),
            eps1,
            eps2,
            a,
            n_cap: default_n_cap(kappa),
        })
    }

    /// Number of ascent steps for the next outer iteration.
    ///
    /// `warm_dist` is `||y_0 - y*(x_1)||` on the first call and
    /// `||x_t - x_{t-1}||` afterwards.
    pub fn iteration_count(&self, is_first: bool, warm_dist: f64) -> usize {
        let root = (self.kappa + 1.0).sqrt();
        let ratio = if is_first {
            root * warm_dist / self.a
        } else {
            root * (self.a + self.kappa * warm_dist) / self.a
        };
        let n = 2.0 * self.kappa.sqrt() * ratio.ln();
        if !(n > 1.0) {
            return 1;
        }
        (n.ceil() as usize).clamp(1, self.n_cap)
    }
}

fn momentum(kappa: f64) -> f64 {
    let r = kappa.sqrt();
    (r - 1.0) / (r + 1.0)
}

/// `10 * ceil(2 sqrt(kappa) ln(1e8))`.
pub fn default_n_cap(kappa: f64) -> usize {
    10 * (2.0 * kappa.sqrt() * 1e8f64.ln()).ceil() as usize
}

/// Inexact first- and second-order information at `x_t`.
#[derive(Debug, Clone)]
pub struct InexactInfo {
    pub y: Vector,
    pub g: Vector,
    pub n_used: usize,
}

impl InexactInfo {
    /// `H_t` as a matrix-free operator at `(x_t, y_t)`.
    pub fn hessian<'a>(&'a self, oracle: &'a dyn MinimaxOracle, x: &'a Vector) -> Result<SchurOperator<'a>> {
        SchurOperator::new(oracle, x, &self.y, DEFAULT_YY_TOL)
    }
}

/// Runs exactly `n` accelerated ascent steps from `y_init`.
pub fn run_ascent(
    oracle: &dyn MinimaxOracle,
    x: &Vector,
    y_init: &Vector,
    schedule: &AscentSchedule,
    n: usize,
) -> Result<InexactInfo> {
    if n == 0 {
        return Err(Error::Precondition("inner ascent needs at least one step".into()));
    }
    let mut y = y_init.clone();
    let mut y_tilde = y_init.clone();
    for _ in 0..n {
        let y_next = &y_tilde + oracle.grad_y(x, &y_tilde) * schedule.eta1;
        y_tilde = &y_next + (&y_next - &y) * schedule.eta2;
        y = y_next;
        let norm = y.norm();
        if !(norm <= OVERFLOW_GUARD) {
            return Err(Error::NumericalOverflow { norm });
        }
    }
    let g = oracle.grad_x(x, &y);
    Ok(InexactInfo { y, g, n_used: n })
}
