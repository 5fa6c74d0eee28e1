//! Per-iteration records shared by every driver.

use serde::{Deserialize, Serialize};

use crate::Vector;

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// `|v_t|` exceeded `sqrt(1 / (1 + Lambda^2))` (exact eigensolve).
    VThreshold,
    /// Ritz pair with large `|v_hat|` and `||k_t|| <= eps / 2`.
    RitzCertified,
    /// Iteration budget exhausted; the returned iterate is uncertified.
    MaxOuter,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::VThreshold => "v_threshold",
            TerminationReason::RitzCertified => "ritz_certified",
            TerminationReason::MaxOuter => "max_outer",
        }
    }
}

/// Which classification branch produced the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Ratio,
    Curvature,
}

/// One outer iteration. Quantities at `x_t` are measured before the step.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub x: Option<Vec<f64>>,
    /// `F(x_t) - F_inf` when a closed form exists.
    pub f_gap: Option<f64>,
    /// `F(x_t)` when a closed form exists.
    pub f_value: Option<f64>,
    /// `||g_t||`.
    pub grad_norm: f64,
    pub v_abs: Option<f64>,
    /// `delta_t` (exact) or `zeta_t` (Lanczos).
    pub delta_or_zeta: Option<f64>,
    /// Regularization `alpha_t` used by the accepted eigen-solve.
    pub alpha: Option<f64>,
    /// `|rho_t|` of the accepted Ritz pair.
    pub rho_abs: Option<f64>,
    /// `||k_t||` of the accepted Ritz pair.
    pub k_norm: Option<f64>,
    pub step_norm: f64,
    pub branch: Option<Branch>,
    pub inner_iters: usize,
    /// Lanczos iterations spent in this outer iteration (all re-solves).
    pub lanczos_iters: Option<usize>,
    /// Every Lanczos call of this outer iteration, in order.
    pub lanczos_calls: Vec<LanczosCall>,
    pub safeguard_retries: usize,
    pub hvp_cum: usize,
    pub wall_ms: f64,
}

/// One Lanczos solve: its iteration count and the `alpha`, `e` it ran with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanczosCall {
    pub iters: usize,
    pub alpha: f64,
    pub e_budget: f64,
}

/// Full record of a solver run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterateTrace {
    pub records: Vec<StepRecord>,
    pub termination: TerminationReason,
    /// Whether the final iterate carries the algorithm's certificate.
    pub certified: bool,
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    pub final_f_gap: Option<f64>,
    /// `||grad F||` at the final iterate when a closed form exists,
    /// otherwise the last `||g_t||`.
    pub final_grad_norm: f64,
    pub final_lambda_min: Option<f64>,
    pub total_hvp: usize,
}

impl IterateTrace {
    pub fn outer_iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_x(&self) -> Vector {
        Vector::from_column_slice(&self.final_x)
    }

    pub fn final_y(&self) -> Vector {
        Vector::from_column_slice(&self.final_y)
    }
}
