//! Inexact outer loop: Lanczos on the matrix-free `G(alpha_t)` with the
//! Ritz-residual termination test and the `(alpha_t, e_t)` safeguard.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::driver::{annotate, check_dims, initial_warm_dist, max_outer_error, RunLog, SNAPSHOT_DIM_LIMIT};
pub use crate::driver::Warm;
use crate::homogeneous::{classify_direction, lanczos_min_eigenpair, HomogenizedOperator, LanczosOptions, RitzPair};
use crate::hsda::{StepOutcome, DEFAULT_MAX_OUTER, DEFAULT_OMEGA};
use crate::inner_ascent::{run_ascent, AscentSchedule};
use crate::oracle::{MinimaxOracle, SmoothnessConstants};
use crate::trace::{IterateTrace, LanczosCall, StepRecord, TerminationReason};
use crate::{Error, Result, Vector};

pub const DEFAULT_SAFEGUARD_RETRIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IhsdaConfig {
    pub eps: f64,
    pub l1: f64,
    pub l2: f64,
    /// `sqrt(eps / L2)`.
    pub lambda: f64,
    pub omega: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Gradient bound; `None` estimates it from samples around `x_1`.
    pub b_g: Option<f64>,
    pub max_outer: usize,
    pub max_safeguard_retries: usize,
    /// Lanczos iteration cap per call; `None` uses the default policy.
    pub lanczos_max_iters: Option<usize>,
    /// Overrides the initial Lanczos budget `e_t = sqrt(L2 eps)`.
    pub initial_e_budget: Option<f64>,
    pub seed: u64,
    pub warm_dist: Option<f64>,
    pub snapshots: Option<bool>,
}

impl IhsdaConfig {
    /// Requires `eps <= min(L2^3 / 36, L2 / 2, 1)`.
    pub fn new(eps: f64, constants: &SmoothnessConstants) -> Result<Self> {
        let l2 = constants.l2();
        let cap = (l2.powi(3) / 36.0).min(l2 / 2.0).min(1.0);
        if !(eps > 0.0 && eps <= cap) {
            return Err(Error::InvalidConfig(format!(
                "eps = {eps} must lie in (0, min(L2^3 / 36, L2 / 2, 1)] = (0, {cap}] with L2 = {l2}"
            )));
        }
        Ok(Self {
            eps,
            l1: constants.l1(),
            l2,
            lambda: (eps / l2).sqrt(),
            omega: DEFAULT_OMEGA,
            eps1: eps / 12.0,
            eps2: (l2 * eps).sqrt() / 12.0,
            b_g: None,
            max_outer: DEFAULT_MAX_OUTER,
            max_safeguard_retries: DEFAULT_SAFEGUARD_RETRIES,
            lanczos_max_iters: None,
            initial_e_budget: None,
            seed: 0,
            warm_dist: None,
            snapshots: None,
        })
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        if !(omega > 0.25 && omega < 0.5) {
            return Err(Error::InvalidConfig(format!("omega = {omega} must lie in (1/4, 1/2)")));
        }
        self.omega = omega;
        Ok(self)
    }

    pub fn with_b_g(mut self, b_g: f64) -> Result<Self> {
        if !(b_g > 0.0 && b_g.is_finite()) {
            return Err(Error::InvalidConfig(format!("B_g must be positive, got {b_g}")));
        }
        self.b_g = Some(b_g);
        Ok(self)
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `sqrt(L2 eps)`, the initial `alpha_t` and `e_t`.
    pub fn base_alpha(&self) -> f64 {
        (self.l2 * self.eps).sqrt()
    }

    pub fn v_threshold(&self) -> f64 {
        (1.0 / (1.0 + self.lambda * self.lambda)).sqrt()
    }

    /// `eps^2 / (16 L2^2)`, the bound on `|rho_t|` every Ritz pair must meet.
    pub fn rho_target(&self) -> f64 {
        self.eps * self.eps / (16.0 * self.l2 * self.l2)
    }

    pub fn schedule(&self, constants: &SmoothnessConstants) -> Result<AscentSchedule> {
        AscentSchedule::new(constants, self.eps1, self.eps2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeguardState {
    pub alpha: f64,
    /// Lanczos accuracy budget `e_t`.
    pub e: f64,
    pub retries: usize,
    pub last_zeta: f64,
    pub last_g_norm: f64,
}

impl SafeguardState {
    pub fn initial(config: &IhsdaConfig) -> Self {
        let base = config.base_alpha();
        Self {
            alpha: base,
            e: config.initial_e_budget.unwrap_or(base),
            retries: 0,
            last_zeta: f64::NAN,
            last_g_norm: f64::NAN,
        }
    }
}

/// `alpha = 3 sqrt(L2 eps) + 2 ||g|| Lambda + (L1 + zeta) Lambda^2`, then
/// `e = min(eps / 4, sqrt(L2) eps^{5/2} / (64 (L1 + alpha + B_g)^2))` with the
/// new `alpha`.
pub fn safeguard_update(
    state: &SafeguardState,
    g_norm: f64,
    zeta: f64,
    config: &IhsdaConfig,
    b_g: f64,
) -> Result<SafeguardState> {
    if state.retries >= config.max_safeguard_retries {
        return Err(Error::RetryBudgetExceeded {
            retries: state.retries,
        });
    }
    let lam = config.lambda;
    let alpha = 3.0 * config.base_alpha() + 2.0 * g_norm * lam + (config.l1 + zeta) * lam * lam;
    let e = (config.eps / 4.0)
        .min(config.l2.sqrt() * config.eps.powf(2.5) / (64.0 * (config.l1 + alpha + b_g).powi(2)));
    Ok(SafeguardState {
        alpha,
        e,
        retries: state.retries + 1,
        last_zeta: zeta,
        last_g_norm: g_norm,
    })
}

/// `2 max ||grad F|| + 1` over `x_1` and points at radius `R/2` and `R`
/// (`R = ||x_1|| + 1`) along coordinate and random directions. Gradients
/// come from the closed form when present, otherwise from the inner ascent.
pub fn estimate_b_g(oracle: &dyn MinimaxOracle, schedule: &AscentSchedule, x1: &Vector, y0: &Vector, seed: u64) -> Result<f64> {
    let n = x1.len();
    let radius = x1.norm() + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_edb0);
    let mut dirs: Vec<Vector> = Vec::new();
    if oracle.closed_form().is_some() {
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut d = Vector::zeros(n);
                d[i] = sign;
                dirs.push(d);
            }
        }
    }
    for _ in 0..8 {
        let d = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = d.norm();
        if norm > 0.0 {
            dirs.push(d / norm);
        }
    }
    let grad_at = |x: &Vector| -> Result<f64> {
        match oracle.closed_form() {
            Some(cf) => Ok(cf.grad(x).norm()),
            None => {
                let dist = oracle.grad_y(x, y0).norm() / oracle.constants().mu();
                let info = run_ascent(oracle, x, y0, schedule, schedule.iteration_count(true, dist))?;
                Ok(info.g.norm())
            }
        }
    };
    let mut best = grad_at(x1)?;
    for r in [radius / 2.0, radius] {
        for d in &dirs {
            best = best.max(grad_at(&(x1 + d * r))?);
        }
    }
    Ok(2.0 * best + 1.0)
}

fn call_seed(base: u64, t: usize, retry: usize) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((t as u64) << 8)
        .wrapping_add(retry as u64)
}

#[allow(clippy::too_many_arguments)]
pub fn ihsda_step(
    oracle: &dyn MinimaxOracle,
    config: &IhsdaConfig,
    schedule: &AscentSchedule,
    b_g: f64,
    t: usize,
    x: &Vector,
    y_prev: &Vector,
    warm: Warm,
) -> Result<StepOutcome> {
    let n_inner = warm.iteration_count(schedule);
    let info = run_ascent(oracle, x, y_prev, schedule, n_inner)?;
    let h = info.hessian(oracle, x)?;
    let g_norm = info.g.norm();
    let threshold = config.v_threshold();

    let mut state = SafeguardState::initial(config);
    let mut calls = Vec::new();
    let mut tolerated_cap = false;
    let pair: RitzPair = loop {
        let op = HomogenizedOperator::new(&h, info.g.clone(), state.alpha)?;
        let opts = LanczosOptions {
            e_budget: state.e,
            max_iters: config.lanczos_max_iters,
            gap_floor: (state.retries > 0).then(|| config.base_alpha()),
            rho_target: Some(config.rho_target()),
            norm_bound: Some(config.l1 + g_norm + state.alpha),
            seed: call_seed(config.seed, t, state.retries),
        };
        let pair = match lanczos_min_eigenpair(&op, &opts) {
            Ok(p) => p,
            Err(Error::MaxItersExceeded { best, .. }) if !tolerated_cap => {
                tolerated_cap = true;
                *best
            }
            Err(e) => return Err(e),
        };
        calls.push(LanczosCall {
            iters: pair.lanczos_iters,
            alpha: state.alpha,
            e_budget: state.e,
        });
        if pair.v_hat.abs() <= threshold || pair.k.norm() <= config.eps / 2.0 {
            break pair;
        }
        state = safeguard_update(&state, g_norm, pair.zeta, config, b_g)?;
    };

    let mut record = StepRecord {
        grad_norm: g_norm,
        v_abs: Some(pair.v_hat.abs()),
        delta_or_zeta: Some(pair.zeta),
        alpha: Some(state.alpha),
        rho_abs: Some(pair.rho.abs()),
        k_norm: Some(pair.k.norm()),
        inner_iters: info.n_used,
        lanczos_iters: Some(calls.iter().map(|c| c.iters).sum()),
        lanczos_calls: calls,
        safeguard_retries: state.retries,
        ..Default::default()
    };

    let (x_next, terminal) = if pair.v_hat.abs() > threshold {
        (x + &pair.u_hat / pair.v_hat, true)
    } else {
        let dir = classify_direction(&pair.u_hat, pair.v_hat, &info.g, config.omega);
        record.branch = Some(dir.branch);
        let s_norm = dir.s.norm();
        if s_norm <= 1e-14 {
            return Err(Error::ZeroDirection);
        }
        (x + &dir.s * (config.lambda / s_norm), false)
    };
    record.step_norm = (&x_next - x).norm();
    let hvp = h.applications();
    drop(h);
    Ok(StepOutcome {
        x_next,
        y: info.y,
        record,
        hvp,
        terminal,
    })
}

/// Runs the inexact loop. Each Lanczos iteration costs one `H_t` product,
/// which is one HVP.
pub fn ihsda_run(oracle: &dyn MinimaxOracle, config: &IhsdaConfig, x1: &Vector, y0: &Vector) -> Result<IterateTrace> {
    check_dims(oracle, x1, y0)?;
    let constants = oracle.constants();
    let schedule = config.schedule(&constants)?;
    let b_g = match config.b_g {
        Some(b) => b,
        None => estimate_b_g(oracle, &schedule, x1, y0, config.seed)?,
    };
    let snapshot = config.snapshots.unwrap_or(oracle.dim_x() <= SNAPSHOT_DIM_LIMIT);
    let mut log = RunLog::new();
    let mut x = x1.clone();
    let mut y = y0.clone();
    let mut warm = Warm::Initial(initial_warm_dist(oracle, x1, y0, config.warm_dist));

    for t in 1..=config.max_outer {
        let mut out = ihsda_step(oracle, config, &schedule, b_g, t, &x, &y, warm)?;
        annotate(oracle, &x, snapshot, &mut out.record);
        warm = Warm::Previous(out.record.step_norm);
        log.push(out.record, out.hvp, &x, &out.y);
        y = out.y;
        x = out.x_next;
        if out.terminal {
            return log.finish(oracle, Some(&schedule), TerminationReason::RitzCertified, true, x, y);
        }
    }
    Err(max_outer_error(log, oracle, &schedule, config.max_outer, (x, y)))
}
