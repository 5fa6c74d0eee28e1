//! Exact-eigensolve outer loop.
//!
//! Each iteration runs the inner ascent, materializes `H_t`, solves the
//! homogenized subproblem densely and either stops (`|v_t|` above
//! `sqrt(1 / (1 + Lambda^2))`, step `u_t / v_t`) or moves a distance
//! `Lambda` along the classified direction.

use crate::driver::{annotate, check_dims, initial_warm_dist, max_outer_error, RunLog, SNAPSHOT_DIM_LIMIT};
pub use crate::driver::Warm;
use crate::homogeneous::{classify_direction, solve_exact};
use crate::inner_ascent::{run_ascent, AscentSchedule};
use crate::oracle::{MinimaxOracle, SmoothnessConstants, DEFAULT_DENSE_THRESHOLD};
use crate::trace::{IterateTrace, StepRecord, TerminationReason};
use crate::{Error, Result, Vector};

/// Default direction threshold.
pub const DEFAULT_OMEGA: f64 = 0.3;
pub const DEFAULT_MAX_OUTER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsdaConfig {
    pub eps: f64,
    /// `L2` the schedule was built from.
    pub l2: f64,
    /// `sqrt(L2 eps)`.
    pub alpha: f64,
    /// Step length `sqrt(eps / L2)`.
    pub lambda: f64,
    pub omega: f64,
    /// `eps / 12`.
    pub eps1: f64,
    /// `sqrt(L2 eps) / 12`.
    pub eps2: f64,
    pub max_outer: usize,
    /// Bound on `||y_0 - y*(x_1)||`; `None` uses `||grad_y f|| / mu`.
    pub warm_dist: Option<f64>,
    /// Record `x_t` in the trace; `None` means only when `n <= 100`.
    pub snapshots: Option<bool>,
}

impl HsdaConfig {
    /// Parameter schedule for target accuracy `eps`. Requires
    /// `eps <= min(L2 / 2, 1)`.
    pub fn new(eps: f64, constants: &SmoothnessConstants) -> Result<Self> {
        let l2 = constants.l2();
        if !(eps > 0.0 && eps <= (l2 / 2.0).min(1.0)) {
            return Err(Error::InvalidConfig(format!(
                "eps = {eps} must lie in (0, min(L2 / 2, 1)] with L2 = {l2}"
            )));
        }
        let alpha = (l2 * eps).sqrt();
        let lambda = (eps / l2).sqrt();
        debug_assert!(lambda <= 0.5f64.sqrt() + 1e-15);
        Ok(Self {
            eps,
            l2,
            alpha,
            lambda,
            omega: DEFAULT_OMEGA,
            eps1: eps / 12.0,
            eps2: alpha / 12.0,
            max_outer: DEFAULT_MAX_OUTER,
            warm_dist: None,
            snapshots: None,
        })
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 0.5) {
            return Err(Error::InvalidConfig(format!("omega = {omega} must lie in (0, 1/2)")));
        }
        self.omega = omega;
        Ok(self)
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }

    /// `sqrt(1 / (1 + Lambda^2))`.
    pub fn v_threshold(&self) -> f64 {
        (1.0 / (1.0 + self.lambda * self.lambda)).sqrt()
    }

    pub fn schedule(&self, constants: &SmoothnessConstants) -> Result<AscentSchedule> {
        AscentSchedule::new(constants, self.eps1, self.eps2)
    }
}

/// Result of one outer iteration.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub x_next: Vector,
    /// `y_t` produced by the inner ascent at `x_t`.
    pub y: Vector,
    /// Record with `t`, `hvp_cum` and `wall_ms` left for the caller.
    pub record: StepRecord,
    /// Hessian-vector products spent in this iteration.
    pub hvp: usize,
    pub terminal: bool,
}

pub fn hsda_step(
    oracle: &dyn MinimaxOracle,
    config: &HsdaConfig,
    schedule: &AscentSchedule,
    x: &Vector,
    y_prev: &Vector,
    warm: Warm,
) -> Result<StepOutcome> {
    let n_inner = warm.iteration_count(schedule);
    let info = run_ascent(oracle, x, y_prev, schedule, n_inner)?;
    let h_op = info.hessian(oracle, x)?;
    let h = h_op.to_dense(DEFAULT_DENSE_THRESHOLD)?;
    let pair = solve_exact(&h, &info.g, config.alpha)?;

    let mut record = StepRecord {
        grad_norm: info.g.norm(),
        v_abs: Some(pair.v.abs()),
        delta_or_zeta: Some(pair.delta),
        alpha: Some(config.alpha),
        inner_iters: info.n_used,
        ..Default::default()
    };
    let dir = classify_direction(&pair.u, pair.v, &info.g, config.omega);
    record.branch = Some(dir.branch);
    let s_norm = dir.s.norm();

    let (x_next, terminal) = if pair.v.abs() > config.v_threshold() {
        (x + &dir.s, true)
    } else if s_norm <= 1e-14 {
        // cannot happen for a unit eigenvector with |v| < 1; guard only
        (x.clone(), true)
    } else {
        (x + &dir.s * (config.lambda / s_norm), false)
    };
    record.step_norm = (&x_next - x).norm();
    let hvp = h_op.applications();
    drop(h_op);
    Ok(StepOutcome {
        x_next,
        y: info.y,
        record,
        hvp,
        terminal,
    })
}

/// Runs the exact loop from `(x1, y0)`. Hitting `max_outer` returns
/// `MaxOuterExceeded` holding an uncertified trace at the best-gradient
/// iterate.
pub fn hsda_run(oracle: &dyn MinimaxOracle, config: &HsdaConfig, x1: &Vector, y0: &Vector) -> Result<IterateTrace> {
    check_dims(oracle, x1, y0)?;
    let constants = oracle.constants();
    let schedule = config.schedule(&constants)?;
    let snapshot = config.snapshots.unwrap_or(oracle.dim_x() <= SNAPSHOT_DIM_LIMIT);
    let mut log = RunLog::new();
    let mut x = x1.clone();
    let mut y = y0.clone();
    let mut warm = Warm::Initial(initial_warm_dist(oracle, x1, y0, config.warm_dist));

    for _ in 0..config.max_outer {
        let mut out = hsda_step(oracle, config, &schedule, &x, &y, warm)?;
        annotate(oracle, &x, snapshot, &mut out.record);
        warm = Warm::Previous(out.record.step_norm);
        log.push(out.record, out.hvp, &x, &out.y);
        y = out.y;
        x = out.x_next;
        if out.terminal {
            return log.finish(oracle, Some(&schedule), TerminationReason::VThreshold, true, x, y);
        }
    }
    Err(max_outer_error(log, oracle, &schedule, config.max_outer, (x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_quadratic, make_wtoy, QuadraticMinimaxParams, WToyParams};
    use crate::ValueFunction;

    fn wtoy_config(eps: f64) -> (crate::problems::WToy, HsdaConfig) {
        let o = make_wtoy(WToyParams::default()).unwrap();
        let c = HsdaConfig::new(eps, &o.constants()).unwrap();
        (o, c)
    }

    #[test]
    fn schedule_from_eps() {
        let (_, c) = wtoy_config(1e-2);
        assert!((c.alpha - 0.02f64.sqrt()).abs() < 1e-15);
        assert!((c.lambda - 0.005f64.sqrt()).abs() < 1e-15);
        assert!((c.eps1 - 1e-2 / 12.0).abs() < 1e-18);
    }

    #[test]
    fn rejects_eps_above_precondition() {
        let o = make_wtoy(WToyParams::default()).unwrap();
        assert!(HsdaConfig::new(1.5, &o.constants()).is_err());
        assert!(HsdaConfig::new(0.0, &o.constants()).is_err());
        let c = HsdaConfig::new(1e-3, &o.constants()).unwrap();
        assert!(c.with_omega(0.5).is_err());
        assert!(c.with_omega(0.45).is_ok());
    }

    #[test]
    fn non_terminal_steps_have_length_lambda() {
        let (o, c) = wtoy_config(1e-3);
        let trace = hsda_run(&o, &c, &Vector::from_vec(vec![0.1, 0.1, 0.1]), &Vector::zeros(2)).unwrap();
        let (last, rest) = trace.records.split_last().unwrap();
        for r in rest {
            assert!((r.step_norm - c.lambda).abs() <= 1e-12 * c.lambda);
        }
        assert!(last.step_norm <= c.lambda);
        assert!(trace.certified);
    }

    #[test]
    fn starts_at_strict_minimizer() {
        let mut p = QuadraticMinimaxParams::random(4, 3, 2);
        p.ell2 = 1.0;
        let o = make_quadratic(p).unwrap();
        let c = HsdaConfig::new(1e-2, &o.constants()).unwrap();
        let xs = o.x_star().unwrap().clone();
        let trace = hsda_run(&o, &c, &xs, &o.y_star(&xs)).unwrap();
        assert_eq!(trace.outer_iterations(), 1);
        assert_eq!(trace.termination, TerminationReason::VThreshold);
        assert!(trace.records[0].v_abs.unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn max_outer_returns_best_iterate() {
        let (o, c) = wtoy_config(1e-3);
        let c = c.with_max_outer(2);
        match hsda_run(&o, &c, &Vector::from_vec(vec![0.0, 0.0, 0.01]), &Vector::zeros(2)) {
            Err(Error::MaxOuterExceeded { max_outer, trace }) => {
                assert_eq!(max_outer, 2);
                assert!(!trace.certified);
                assert_eq!(trace.termination, TerminationReason::MaxOuter);
                assert_eq!(trace.records.len(), 2);
            }
            other => panic!("expected MaxOuterExceeded, got {other:?}"),
        }
    }

    #[test]
    fn hvp_count_is_dimension_per_iteration() {
        let (o, c) = wtoy_config(1e-3);
        let trace = hsda_run(&o, &c, &Vector::from_vec(vec![1.0, 0.1, 0.1]), &Vector::zeros(2)).unwrap();
        assert_eq!(trace.total_hvp, 3 * trace.outer_iterations());
    }
}
