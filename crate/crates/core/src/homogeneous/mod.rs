//! The homogenized eigenvalue subproblem
//!
//! ```text
//! min_{||[u; v]|| <= 1} [u; v]^T G(alpha) [u; v],   G(alpha) = [[H, g], [g^T, -alpha]]
//! ```
//!
//! solved exactly ([`solve_exact`]) or by Lanczos ([`lanczos_min_eigenpair`]),
//! together with the direction rule and conditioning diagnostics.

mod conditioning;
mod direction;
mod exact;
mod lanczos;

pub use conditioning::{conditioning_report, kappa_l_upper_bound, ConditioningReport};
pub use direction::{classify_direction, Direction};
pub use exact::{check_optimality, homogenized_dense, solve_exact, ExactEigenpair, OptimalityReport};
pub use lanczos::{default_max_iters, lanczos_iteration_bound, lanczos_min_eigenpair, LanczosOptions, RitzPair};

use crate::linalg::LinearOperator;
use crate::{Error, Result, Vector};

/// Matrix-free `G(alpha)` on `R^{n+1}`.
pub struct HomogenizedOperator<'a> {
    h: &'a dyn LinearOperator,
    g: Vector,
    alpha: f64,
}

impl<'a> HomogenizedOperator<'a> {
    pub fn new(h: &'a dyn LinearOperator, g: Vector, alpha: f64) -> Result<Self> {
        if g.len() != h.dim() {
            return Err(Error::Precondition(format!(
                "gradient has length {}, operator dimension is {}",
                g.len(),
                h.dim()
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { h, g, alpha })
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn g(&self) -> &Vector {
        &self.g
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h(&self) -> &dyn LinearOperator {
        self.h
    }
}

impl LinearOperator for HomogenizedOperator<'_> {
    fn dim(&self) -> usize {
        self.g.len() + 1
    }

    fn apply(&self, z: &Vector) -> Result<Vector> {
        let n = self.n();
        let u = z.rows(0, n).into_owned();
        let v = z[n];
        let top = self.h.apply(&u)? + &self.g * v;
        let mut out = Vector::zeros(n + 1);
        out.rows_mut(0, n).copy_from(&top);
        out[n] = self.g.dot(&u) - self.alpha * v;
        Ok(out)
    }
}

/// Sign convention shared by both solvers: `v >= 0`, and when `v` vanishes
/// the first nonzero entry of `u` is positive. Returns whether the sign flipped.
pub(crate) fn normalize_sign(z: &mut Vector) -> bool {
    let n = z.len() - 1;
    let flip = if z[n].abs() > SIGN_ZERO {
        z[n] < 0.0
    } else {
        z.rows(0, n)
            .iter()
            .find(|c| c.abs() > SIGN_ZERO)
            .is_some_and(|&c| c < 0.0)
    };
    if flip {
        z.neg_mut();
    }
    flip
}

/// Components below this are treated as zero by the sign convention.
const SIGN_ZERO: f64 = 1e-14;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    #[test]
    fn apply_matches_dense_lift() {
        let h = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -2.0]);
        let g = Vector::from_vec(vec![0.3, -0.7]);
        let op = HomogenizedOperator::new(&h, g.clone(), 0.4).unwrap();
        let dense = homogenized_dense(&h, &g, 0.4);
        let z = Vector::from_vec(vec![1.0, 2.0, -3.0]);
        assert!((op.apply(&z).unwrap() - &dense * &z).norm() < 1e-15);
        assert!((&dense - dense.transpose()).norm() == 0.0);
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let h = Matrix::identity(2, 2);
        assert!(HomogenizedOperator::new(&h, Vector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn sign_convention() {
        let mut z = Vector::from_vec(vec![0.6, -0.8, -0.0]);
        normalize_sign(&mut z);
        assert!(z[0] > 0.0);
        let mut z = Vector::from_vec(vec![0.6, 0.0, -0.8]);
        normalize_sign(&mut z);
        assert_eq!(z.as_slice(), &[-0.6, -0.0, 0.8]);
    }
}
