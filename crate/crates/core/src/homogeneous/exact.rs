use serde::{Deserialize, Serialize};

use super::normalize_sign;
use crate::linalg::{sorted_symmetric_eigen, LinearOperator};
use crate::{Error, Matrix, Result, Vector};

/// Smallest eigenpair of `G(alpha)` with `delta = -lambda_1(G)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactEigenpair {
    pub delta: f64,
    pub u: Vector,
    pub v: f64,
}

/// Residuals of the optimality system
/// `(H + delta I) u = -v g`, `g^T u = v (alpha - delta)`, `||[u; v]|| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityReport {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub delta_ge_alpha: bool,
    /// `delta > alpha`; only meaningful when `g != 0`, `None` otherwise.
    pub delta_gt_alpha: Option<bool>,
}

impl OptimalityReport {
    pub fn max_residual(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.delta_ge_alpha && self.delta_gt_alpha != Some(false)
    }
}

/// `[[H, g], [g^T, -alpha]]`.
pub fn homogenized_dense(h: &Matrix, g: &Vector, alpha: f64) -> Matrix {
    let n = g.len();
    let mut m = Matrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(h);
    m.view_mut((0, n), (n, 1)).copy_from(g);
    m.view_mut((n, 0), (1, n)).copy_from(&g.transpose());
    m[(n, n)] = -alpha;
    m
}

/// Dense solve of the homogenized subproblem.
pub fn solve_exact(h: &Matrix, g: &Vector, alpha: f64) -> Result<ExactEigenpair> {
    if !(alpha > 0.0) {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    if h.nrows() != g.len() || h.ncols() != g.len() {
        return Err(Error::Precondition(format!(
            "H is {}x{} but g has length {}",
            h.nrows(),
            h.ncols(),
            g.len()
        )));
    }
    let n = g.len();
    let (values, vectors) = sorted_symmetric_eigen(&homogenized_dense(h, g, alpha))?;
    let mut z = vectors.column(0).into_owned();
    z /= z.norm();
    normalize_sign(&mut z);
    Ok(ExactEigenpair {
        // the last diagonal entry bounds lambda_1 from above, so delta >= alpha
        // holds exactly; anything below is eigensolver roundoff
        delta: (-values[0]).max(alpha),
        u: z.rows(0, n).into_owned(),
        v: z[n],
    })
}

/// Evaluates the optimality residuals of `pair`. Nothing is thrown for a
/// bad pair; the residuals report it.
pub fn check_optimality(
    pair: &ExactEigenpair,
    h: &dyn LinearOperator,
    g: &Vector,
    alpha: f64,
) -> Result<OptimalityReport> {
    let ExactEigenpair { delta, u, v } = pair;
    let r1 = (h.apply(u)? + u * *delta + g * *v).norm();
    let r2 = (g.dot(u) - v * (alpha - delta)).abs();
    let r3 = ((u.norm_squared() + v * v).sqrt() - 1.0).abs();
    let g_nonzero = g.norm() > 0.0;
    Ok(OptimalityReport {
        r1,
        r2,
        r3,
        delta_ge_alpha: *delta >= alpha,
        delta_gt_alpha: g_nonzero.then_some(*delta > alpha),
    })
}
