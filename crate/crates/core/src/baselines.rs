//! Gradient descent ascent.

use crate::driver::{annotate, check_dims, RunLog, SNAPSHOT_DIM_LIMIT};
use crate::inner_ascent::OVERFLOW_GUARD;
use crate::oracle::{MinimaxOracle, SmoothnessConstants};
use crate::trace::{IterateTrace, StepRecord, TerminationReason};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdaConfig {
    /// Descent step; zero freezes `x`.
    pub step_x: f64,
    pub step_y: f64,
    pub ascent_steps: usize,
    pub max_outer: usize,
    pub snapshots: Option<bool>,
}

impl GdaConfig {
    /// Two-timescale defaults `step_y = 1 / ell1`, `step_x = 1 / (kappa^2 ell1)`.
    pub fn from_constants(constants: &SmoothnessConstants) -> Self {
        let ell1 = constants.ell1();
        let kappa = constants.kappa();
        Self {
            step_x: 1.0 / (kappa * kappa * ell1),
            step_y: 1.0 / ell1,
            ascent_steps: 1,
            max_outer: 200,
            snapshots: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_x >= 0.0 && self.step_x.is_finite()) {
            return Err(Error::InvalidConfig(format!("step_x must be non-negative, got {}", self.step_x)));
        }
        if !(self.step_y > 0.0 && self.step_y.is_finite()) {
            return Err(Error::InvalidConfig(format!("step_y must be positive, got {}", self.step_y)));
        }
        if self.ascent_steps == 0 {
            return Err(Error::InvalidConfig("ascent_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs `max_outer` rounds of `ascent_steps` ascent steps on `y` followed by
/// one descent step on `x`. Always ends with reason `max_outer`.
pub fn gda_run(oracle: &dyn MinimaxOracle, config: &GdaConfig, x1: &Vector, y0: &Vector) -> Result<IterateTrace> {
    config.validate()?;
    check_dims(oracle, x1, y0)?;
    let snapshot = config.snapshots.unwrap_or(oracle.dim_x() <= SNAPSHOT_DIM_LIMIT);
    let mut log = RunLog::new();
    let mut x = x1.clone();
    let mut y = y0.clone();
    for _ in 0..config.max_outer {
        for _ in 0..config.ascent_steps {
            y += oracle.grad_y(&x, &y) * config.step_y;
        }
        let g = oracle.grad_x(&x, &y);
        let step = &g * config.step_x;
        let mut rec = StepRecord {
            grad_norm: g.norm(),
            step_norm: step.norm(),
            inner_iters: config.ascent_steps,
            ..Default::default()
        };
        annotate(oracle, &x, snapshot, &mut rec);
        log.push(rec, 0, &x, &y);
        x -= step;
        let norm = x.norm().max(y.norm());
        if !(norm <= OVERFLOW_GUARD) {
            return Err(Error::NumericalOverflow { norm });
        }
    }
    log.finish(oracle, None, TerminationReason::MaxOuter, false, x, y)
}
