//! Bookkeeping shared by the outer loops.

use std::time::Instant;

use crate::inner_ascent::{run_ascent, AscentSchedule};
use crate::linalg::lambda_min;
use crate::oracle::MinimaxOracle;
use crate::trace::{IterateTrace, StepRecord, TerminationReason};
use crate::{Error, Result, Vector};

/// Above this dimension x-snapshots are off unless requested.
pub(crate) const SNAPSHOT_DIM_LIMIT: usize = 100;

/// How the inner ascent is warm-started.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warm {
    /// First outer iteration, with a bound on `||y_0 - y*(x_1)||`.
    Initial(f64),
    /// Later iterations, with the previous step length `||x_t - x_{t-1}||`.
    Previous(f64),
}

impl Warm {
    pub(crate) fn iteration_count(&self, schedule: &AscentSchedule) -> usize {
        match *self {
            Warm::Initial(d) => schedule.iteration_count(true, d),
            Warm::Previous(d) => schedule.iteration_count(false, d),
        }
    }
}

/// `||y_0 - y*(x_1)|| <= ||grad_y f(x_1, y_0)|| / mu` by strong concavity.
pub(crate) fn initial_warm_dist(oracle: &dyn MinimaxOracle, x1: &Vector, y0: &Vector, given: Option<f64>) -> f64 {
    given.unwrap_or_else(|| oracle.grad_y(x1, y0).norm() / oracle.constants().mu())
}

pub(crate) fn check_dims(oracle: &dyn MinimaxOracle, x: &Vector, y: &Vector) -> Result<()> {
    if x.len() != oracle.dim_x() || y.len() != oracle.dim_y() {
        return Err(Error::Precondition(format!(
            "initial point has dimensions ({}, {}), problem expects ({}, {})",
            x.len(),
            y.len(),
            oracle.dim_x(),
            oracle.dim_y()
        )));
    }
    Ok(())
}

/// Fills `f_value`, `f_gap` and the optional snapshot of `x_t`.
pub(crate) fn annotate(oracle: &dyn MinimaxOracle, x: &Vector, snapshot: bool, rec: &mut StepRecord) {
    if let Some(cf) = oracle.closed_form() {
        let f = cf.value(x);
        rec.f_value = Some(f);
        rec.f_gap = Some(f - cf.f_inf());
    }
    if snapshot {
        rec.x = Some(x.iter().copied().collect());
    }
}

/// Run state shared by the drivers.
pub(crate) struct RunLog {
    pub records: Vec<StepRecord>,
    pub hvp_cum: usize,
    start: Instant,
    best: Option<(f64, Vector, Vector)>,
}

impl RunLog {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
            hvp_cum: 0,
            start: Instant::now(),
            best: None,
        }
    }

    pub fn push(&mut self, mut rec: StepRecord, hvp: usize, x: &Vector, y: &Vector) {
        self.hvp_cum += hvp;
        rec.t = self.records.len() + 1;
        rec.hvp_cum = self.hvp_cum;
        rec.wall_ms = self.start.elapsed().as_secs_f64() * 1e3;
        if self.best.as_ref().is_none_or(|(g, _, _)| rec.grad_norm < *g) {
            self.best = Some((rec.grad_norm, x.clone(), y.clone()));
        }
        self.records.push(rec);
    }

    /// Smallest-`||g_t||` iterate seen so far.
    pub fn best(&self) -> Option<(Vector, Vector)> {
        self.best.as_ref().map(|(_, x, y)| (x.clone(), y.clone()))
    }

    /// Builds the trace at `(x, y)`. Without a closed form the final gradient
    /// is estimated by one more warm-started inner ascent.
    pub fn finish(
        self,
        oracle: &dyn MinimaxOracle,
        schedule: Option<&AscentSchedule>,
        termination: TerminationReason,
        certified: bool,
        x: Vector,
        y: Vector,
    ) -> Result<IterateTrace> {
        let (final_f_gap, final_grad_norm, final_lambda_min, final_y) = match oracle.closed_form() {
            Some(cf) => (
                Some(cf.value(&x) - cf.f_inf()),
                cf.grad(&x).norm(),
                Some(lambda_min(&cf.hess(&x))?),
                cf.y_star(&x),
            ),
            None => match schedule {
                Some(s) => {
                    let last_step = self.records.last().map_or(0.0, |r| r.step_norm);
                    let info = run_ascent(oracle, &x, &y, s, s.iteration_count(false, last_step))?;
                    (None, info.g.norm(), None, info.y)
                }
                None => (None, oracle.grad_x(&x, &y).norm(), None, y),
            },
        };
        Ok(IterateTrace {
            records: self.records,
            termination,
            certified,
            final_x: x.iter().copied().collect(),
            final_y: final_y.iter().copied().collect(),
            final_f_gap,
            final_grad_norm,
            final_lambda_min,
            total_hvp: self.hvp_cum,
        })
    }
}

/// Wraps an uncertified best-iterate trace into `MaxOuterExceeded`.
pub(crate) fn max_outer_error(
    log: RunLog,
    oracle: &dyn MinimaxOracle,
    schedule: &AscentSchedule,
    max_outer: usize,
    fallback: (Vector, Vector),
) -> Error {
    let (x, y) = log.best().unwrap_or(fallback);
    match log.finish(oracle, Some(schedule), TerminationReason::MaxOuter, false, x, y) {
        Ok(trace) => Error::MaxOuterExceeded {
            max_outer,
            trace: Box::new(trace),
        },
        Err(e) => e,
    }
}
