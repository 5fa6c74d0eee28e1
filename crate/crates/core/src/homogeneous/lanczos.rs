//! Lanczos with full reorthogonalization for the smallest eigenpair of
//! `G(alpha)`, started from a vector skewed toward the lifted coordinate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{normalize_sign, HomogenizedOperator};
use crate::linalg::{sorted_symmetric_eigen, LinearOperator};
use crate::{Error, Matrix, Result, Vector};

/// Approximate eigenpair `(-zeta, [u_hat; v_hat])` of `G(alpha)` with residual
/// `G [u_hat; v_hat] + zeta [u_hat; v_hat] = [k; rho]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RitzPair {
    pub zeta: f64,
    pub u_hat: Vector,
    pub v_hat: f64,
    pub k: Vector,
    pub rho: f64,
    pub e_budget: f64,
    pub lanczos_iters: usize,
}

impl RitzPair {
    pub fn residual_norm(&self) -> f64 {
        (self.k.norm_squared() + self.rho * self.rho).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Eigenvalue accuracy budget `e`.
    pub e_budget: f64,
    /// Iteration cap; `None` uses [`default_max_iters`].
    pub max_iters: Option<usize>,
    /// Lower bound on the spectral gap `lambda_2 - lambda_1`. When present,
    /// the certificate `||r||^2 / gap_floor <= e` is enabled.
    pub gap_floor: Option<f64>,
    /// Extra requirement `|rho| <= rho_target` on the lifted coordinate of
    /// the residual before the eigenvalue budget may stop the run.
    pub rho_target: Option<f64>,
    /// Upper bound on `||G||`, used for the default iteration cap.
    pub norm_bound: Option<f64>,
    pub seed: u64,
}

impl LanczosOptions {
    pub fn new(e_budget: f64, seed: u64) -> Self {
        Self {
            e_budget,
            max_iters: None,
            gap_floor: None,
            rho_target: None,
            norm_bound: None,
            seed,
        }
    }
}

/// `min(n + 1, ceil(8 sqrt(kappa_est) ln((n + 1) / e)))` with
/// `kappa_est = 2 ||G|| / gap_floor`; `n + 1` when no gap floor is known.
pub fn default_max_iters(n: usize, e_budget: f64, gap_floor: Option<f64>, norm_bound: Option<f64>) -> usize {
    let full = n + 1;
    match (gap_floor, norm_bound) {
        (Some(gap), Some(norm)) if gap > 0.0 && norm.is_finite() => {
            let kappa_est = (2.0 * norm / gap).max(1.0);
            let iters = 8.0 * kappa_est.sqrt() * ((n as f64 + 1.0) / e_budget).ln().max(1.0);
            (iters.ceil() as usize).clamp(1, full)
        }
        _ => full,
    }
}

/// Iteration bound `ceil(sqrt(kappa_L) ln(2 (n + 1) / e))` for a Lanczos
/// run to accuracy `e` on an operator with Lanczos condition number `kappa_L`.
pub fn lanczos_iteration_bound(kappa_l: f64, n: usize, e_budget: f64) -> usize {
    (kappa_l.sqrt() * (2.0 * (n as f64 + 1.0) / e_budget).ln()).ceil() as usize
}

/// Smallest Ritz pair of `op`, stopping when `||r|| <= e` or, with a gap
/// floor, when `||r||^2 / floor <= e`. Either test also needs `|rho|` below
/// `rho_target` when one is set. An exhausted Krylov space always stops.
///
/// Every iteration applies `op` exactly once; no extra application is made
/// to form the residual.
pub fn lanczos_min_eigenpair(op: &HomogenizedOperator<'_>, opts: &LanczosOptions) -> Result<RitzPair> {
    if !(opts.e_budget > 0.0) {
        return Err(Error::Precondition(format!(
            "Lanczos accuracy budget must be positive, got {}",
            opts.e_budget
        )));
    }
    let n = op.n();
    let dim = n + 1;
    let max_iters = opts
        .max_iters
        .unwrap_or_else(|| default_max_iters(n, opts.e_budget, opts.gap_floor, opts.norm_bound))
        .clamp(1, dim);

    let mut basis: Vec<Vector> = Vec::with_capacity(max_iters);
    let mut images: Vec<Vector> = Vec::with_capacity(max_iters);
    let mut diag: Vec<f64> = Vec::with_capacity(max_iters);
    let mut offdiag: Vec<f64> = Vec::with_capacity(max_iters);

    let mut q = skewed_start(n, opts.seed);
    let mut scale = 0.0f64;

    for k in 1..=max_iters {
        let w = op.apply(&q)?;
        let a = q.dot(&w);
        let mut r = &w - &q * a;
        if let (Some(prev), Some(&b)) = (basis.last(), offdiag.last()) {
            r.axpy(-b, prev, 1.0);
        }
        basis.push(q);
        images.push(w);
        diag.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&r);
                r.axpy(-c, v, 1.0);
            }
        }
        let beta = r.norm();
        scale = scale.max(a.abs() + beta + offdiag.last().copied().unwrap_or(0.0));

        let (_, coeffs) = tridiagonal_eigen(&diag, &offdiag)?;
        let last = coeffs[(k - 1, 0)];
        let residual_est = beta * last.abs();
        let rho_est = (last * r[n]).abs();

        let exhausted = k == dim || beta <= 1e-14 * scale.max(1.0);
        let budget = residual_est <= opts.e_budget
            || opts
                .gap_floor
                .is_some_and(|floor| residual_est * residual_est / floor <= opts.e_budget);
        let rho_ok = opts.rho_target.is_none_or(|target| rho_est <= target);

        if (budget && rho_ok) || exhausted {
            return Ok(extract(&basis, &images, &coeffs, n, opts.e_budget, k));
        }
        if k == max_iters {
            let best = extract(&basis, &images, &coeffs, n, opts.e_budget, k);
            return Err(Error::MaxItersExceeded {
                iters: k,
                best: Box::new(best),
            });
        }
        offdiag.push(beta);
        q = r / beta;
    }
    unreachable!("loop returns by max_iters")
}

/// `normalize([r; ||r||])` with `r` standard Gaussian.
fn skewed_start(n: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut z = Vector::zeros(n + 1);
    z.rows_mut(0, n).copy_from_slice(&r);
    z[n] = z.rows(0, n).norm();
    if z[n] == 0.0 {
        z[n] = 1.0;
    }
    let norm = z.norm();
    z / norm
}

fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<(Vector, Matrix)> {
    let k = diag.len();
    let mut t = Matrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = diag[i];
        if i + 1 < k {
            t[(i, i + 1)] = offdiag[i];
            t[(i + 1, i)] = offdiag[i];
        }
    }
    sorted_symmetric_eigen(&t)
}

fn extract(basis: &[Vector], images: &[Vector], coeffs: &Matrix, n: usize, e_budget: f64, iters: usize) -> RitzPair {
    let mut z = Vector::zeros(n + 1);
    let mut gz = Vector::zeros(n + 1);
    for (j, (v, w)) in basis.iter().zip(images).enumerate() {
        let c = coeffs[(j, 0)];
        z.axpy(c, v, 1.0);
        gz.axpy(c, w, 1.0);
    }
    let norm = z.norm();
    z /= norm;
    gz /= norm;
    if normalize_sign(&mut z) {
        gz.neg_mut();
    }
    let theta = z.dot(&gz);
    let residual = gz - &z * theta;
    RitzPair {
        zeta: -theta,
        u_hat: z.rows(0, n).into_owned(),
        v_hat: z[n],
        k: residual.rows(0, n).into_owned(),
        rho: residual[n],
        e_budget,
        lanczos_iters: iters,
    }
}
