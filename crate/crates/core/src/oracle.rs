//! Problem-oracle contract, smoothness constants and the Schur-complement
//! Hessian surrogate `H(x, y) = f_xx - f_xy (f_yy)^{-1} f_yx`.

use std::cell::Cell;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::linalg::{conjugate_gradient, symmetrize, LinearOperator};
use crate::{Error, Matrix, Result, Vector};

/// Largest `n` for which [`h_dense`] will materialize `H`.
pub const DEFAULT_DENSE_THRESHOLD: usize = 512;
/// Largest `m` for which the y-block is factored directly instead of CG.
pub const DIRECT_YY_THRESHOLD: usize = 64;
/// Default relative tolerance of the y-block solve.
pub const DEFAULT_YY_TOL: f64 = 1e-12;

/// Access to `f` and its derivative blocks. Every solver touches a problem
/// only through this trait.
///
/// Implementations must be strongly concave in `y` with modulus
/// `constants().mu` and have adjoint-consistent mixed blocks.
pub trait MinimaxOracle: Send + Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn value(&self, x: &Vector, y: &Vector) -> f64;
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector;
    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector;
    /// `f_xx(x, y) v` for an x-vector `v`.
    fn hess_xx_vec(&self, x: &Vector, y: &Vector, v: &Vector) -> Vector;
    /// `f_xy(x, y) w` for a y-vector `w`; returns an x-vector.
    fn hess_xy_vec(&self, x: &Vector, y: &Vector, w: &Vector) -> Vector;
    /// `f_yx(x, y) v` for an x-vector `v`; returns a y-vector.
    fn hess_yx_vec(&self, x: &Vector, y: &Vector, v: &Vector) -> Vector;
    /// `f_yy(x, y) w` for a y-vector `w`.
    fn hess_yy_vec(&self, x: &Vector, y: &Vector, w: &Vector) -> Vector;
    fn constants(&self) -> SmoothnessConstants;
    /// Closed-form value function, when the problem has one.
    fn closed_form(&self) -> Option<&dyn ValueFunction> {
        None
    }
}

/// Closed-form access to `F(x) = max_y f(x, y)`.
pub trait ValueFunction: Send + Sync {
    fn value(&self, x: &Vector) -> f64;
    fn grad(&self, x: &Vector) -> Vector;
    fn hess(&self, x: &Vector) -> Matrix;
    fn y_star(&self, x: &Vector) -> Vector;
    /// Infimum of `F`.
    fn f_inf(&self) -> f64;
}

/// Lipschitz constants of the value function, when a problem knows bounds
/// tighter than the generic ones derived from `(mu, ell1, ell2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueBounds {
    /// Gradient Lipschitz constant of `F`; also bounds `||H||`.
    pub l1: f64,
    /// Lipschitz constant of `H(x, y)` in the joint variable.
    pub lh: f64,
    /// Hessian Lipschitz constant of `F`.
    pub l2: f64,
}

/// `mu`, `ell1`, `ell2` of `f` and the value-function constants derived
/// from them. Derived values are always recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    mu: f64,
    ell1: f64,
    ell2: f64,
    value_bounds: Option<ValueBounds>,
}

impl SmoothnessConstants {
    pub fn new(mu: f64, ell1: f64, ell2: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Construction(format!("mu must be positive, got {mu}")));
        }
        if !(ell1 >= mu && ell1.is_finite()) {
            return Err(Error::Construction(format!(
                "ell1 = {ell1} must be finite and at least mu = {mu}"
            )));
        }
        if !(ell2 >= 0.0 && ell2.is_finite()) {
            return Err(Error::Construction(format!("ell2 must be nonnegative, got {ell2}")));
        }
        Ok(Self {
            mu,
            ell1,
            ell2,
            value_bounds: None,
        })
    }

    /// Replace the generic `L1, L_H, L2` with problem-specific bounds. They
    /// must not exceed the generic ones and must satisfy `L2 >= L_H >= ell2`.
    pub fn with_value_bounds(mut self, bounds: ValueBounds) -> Result<Self> {
        let ValueBounds { l1, lh, l2 } = bounds;
        let slack = 1.0 + 1e-12;
        if !(l1 > 0.0 && l1 <= self.generic_l1() * slack) {
            return Err(Error::Construction(format!(
                "L1 = {l1} must lie in (0, {}]",
                self.generic_l1()
            )));
        }
        if !(lh <= self.generic_lh() * slack && l2 <= self.generic_l2() * slack) {
            return Err(Error::Construction(format!(
                "L_H = {lh}, L2 = {l2} exceed the generic bounds {}, {}",
                self.generic_lh(),
                self.generic_l2()
            )));
        }
        if !(l2 >= lh && lh >= self.ell2) {
            return Err(Error::Construction(format!(
                "need L2 >= L_H >= ell2, got {l2}, {lh}, {}",
                self.ell2
            )));
        }
        self.value_bounds = Some(bounds);
        Ok(self)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn ell1(&self) -> f64 {
        self.ell1
    }

    pub fn ell2(&self) -> f64 {
        self.ell2
    }

    pub fn value_bounds(&self) -> Option<ValueBounds> {
        self.value_bounds
    }

    /// Condition number `ell1 / mu`.
    pub fn kappa(&self) -> f64 {
        self.ell1 / self.mu
    }

    pub fn generic_l1(&self) -> f64 {
        (self.kappa() + 1.0) * self.ell1
    }

    pub fn generic_lh(&self) -> f64 {
        self.ell2 * (1.0 + self.kappa()).powi(2)
    }

    pub fn generic_l2(&self) -> f64 {
        self.ell2 * (1.0 + self.kappa()).powi(3)
    }

    /// Gradient Lipschitz constant of `F` in force.
    pub fn l1(&self) -> f64 {
        self.value_bounds.map_or_else(|| self.generic_l1(), |b| b.l1)
    }

    pub fn lh(&self) -> f64 {
        self.value_bounds.map_or_else(|| self.generic_lh(), |b| b.lh)
    }

    pub fn l2(&self) -> f64 {
        self.value_bounds.map_or_else(|| self.generic_l2(), |b| b.l2)
    }
}

/// Factored (or CG-backed) solver for `f_yy(x, y) z = w` at a fixed point.
enum YBlock {
    /// Cholesky factor of `-f_yy`.
    Direct(Cholesky<f64, nalgebra::Dyn>),
    Iterative { max_iters: usize },
}

/// Solver for the y-block system at a fixed `(x, y)`.
pub struct YySolver<'a> {
    oracle: &'a dyn MinimaxOracle,
    x: &'a Vector,
    y: &'a Vector,
    tol: f64,
    block: YBlock,
}

impl<'a> YySolver<'a> {
    pub fn new(oracle: &'a dyn MinimaxOracle, x: &'a Vector, y: &'a Vector, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!("yy_solve tolerance must be positive, got {tol}")));
        }
        let m = oracle.dim_y();
        let block = if m <= DIRECT_YY_THRESHOLD {
            let mut neg = Matrix::zeros(m, m);
            let mut e = Vector::zeros(m);
            for j in 0..m {
                e[j] = 1.0;
                neg.set_column(j, &(-oracle.hess_yy_vec(x, y, &e)));
                e[j] = 0.0;
            }
            let neg = symmetrize(&neg);
            let chol = Cholesky::new(neg).ok_or_else(|| {
                Error::Precondition("f_yy is not negative definite at this point".into())
            })?;
            YBlock::Direct(chol)
        } else {
            let c = oracle.constants();
            let cap = 20.0 * c.kappa().sqrt() * (1.0 / tol).ln();
            YBlock::Iterative {
                max_iters: cap.ceil().max(1.0) as usize,
            }
        };
        Ok(Self { oracle, x, y, tol, block })
    }

    /// Returns `z` with `||f_yy z - w|| <= tol ||w||`.
    pub fn solve(&self, w: &Vector) -> Result<Vector> {
        match &self.block {
            YBlock::Direct(chol) => {
                let z = -chol.solve(w);
                let residual = (self.oracle.hess_yy_vec(self.x, self.y, &z) - w).norm();
                let w_norm = w.norm();
                // A direct solve only misses the target when f_yy is nearly singular.
                if residual > self.tol * w_norm {
                    return Err(Error::NonConvergence {
                        iters: 0,
                        residual: residual / w_norm,
                        tol: self.tol,
                    });
                }
                Ok(z)
            }
            YBlock::Iterative { max_iters } => {
                let neg_w = -w;
                let out = conjugate_gradient(
                    |v| Ok(-self.oracle.hess_yy_vec(self.x, self.y, v)),
                    &neg_w,
                    self.tol,
                    *max_iters,
                )?;
                Ok(out.solution)
            }
        }
    }
}

/// Solves `f_yy(x, y) z = w` to relative residual `tol`.
pub fn yy_solve(oracle: &dyn MinimaxOracle, x: &Vector, y: &Vector, w: &Vector, tol: f64) -> Result<Vector> {
    YySolver::new(oracle, x, y, tol)?.solve(w)
}

/// Matrix-free `H(x, y)`, counting applications as Hessian-vector products.
pub struct SchurOperator<'a> {
    oracle: &'a dyn MinimaxOracle,
    x: &'a Vector,
    y: &'a Vector,
    solver: YySolver<'a>,
    applications: Cell<usize>,
}

impl<'a> SchurOperator<'a> {
    pub fn new(oracle: &'a dyn MinimaxOracle, x: &'a Vector, y: &'a Vector, tol: f64) -> Result<Self> {
        Ok(Self {
            oracle,
            x,
            y,
            solver: YySolver::new(oracle, x, y, tol)?,
            applications: Cell::new(0),
        })
    }

    /// Number of `apply` calls so far.
    pub fn applications(&self) -> usize {
        self.applications.get()
    }

    /// Materializes `H` column by column, symmetrized.
    pub fn to_dense(&self, limit: usize) -> Result<Matrix> {
        let n = self.oracle.dim_x();
        if n > limit {
            return Err(Error::DimensionTooLarge { n, limit });
        }
        let mut h = Matrix::zeros(n, n);
        let mut e = Vector::zeros(n);
        for j in 0..n {
            e[j] = 1.0;
            h.set_column(j, &self.apply(&e)?);
            e[j] = 0.0;
        }
        Ok(symmetrize(&h))
    }
}

impl LinearOperator for SchurOperator<'_> {
    fn dim(&self) -> usize {
        self.oracle.dim_x()
    }

    fn apply(&self, v: &Vector) -> Result<Vector> {
        self.applications.set(self.applications.get() + 1);
        let (o, x, y) = (self.oracle, self.x, self.y);
        let z = self.solver.solve(&o.hess_yx_vec(x, y, v))?;
        Ok(o.hess_xx_vec(x, y, v) - o.hess_xy_vec(x, y, &z))
    }
}

/// Action of `H(x, y)` on `v`.
pub fn h_vec(oracle: &dyn MinimaxOracle, x: &Vector, y: &Vector, v: &Vector, tol: f64) -> Result<Vector> {
    SchurOperator::new(oracle, x, y, tol)?.apply(v)
}

/// Dense `H(x, y)` for `n <= DEFAULT_DENSE_THRESHOLD`.
pub fn h_dense(oracle: &dyn MinimaxOracle, x: &Vector, y: &Vector) -> Result<Matrix> {
    h_dense_with_limit(oracle, x, y, DEFAULT_DENSE_THRESHOLD)
}

pub fn h_dense_with_limit(oracle: &dyn MinimaxOracle, x: &Vector, y: &Vector, limit: usize) -> Result<Matrix> {
    let n = oracle.dim_x();
    if n > limit {
        return Err(Error::DimensionTooLarge { n, limit });
    }
    SchurOperator::new(oracle, x, y, DEFAULT_YY_TOL)?.to_dense(limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f(x, y) = a x.y + (q/2)|x|^2 - (c/2)|y|^2` with `n = m`.
    struct Bilinear {
        dim: usize,
        a: f64,
        q: f64,
        c: f64,
    }

    impl MinimaxOracle for Bilinear {
        fn dim_x(&self) -> usize {
            self.dim
        }
        fn dim_y(&self) -> usize {
            self.dim
        }
        fn value(&self, x: &Vector, y: &Vector) -> f64 {
            self.a * x.dot(y) + 0.5 * self.q * x.norm_squared() - 0.5 * self.c * y.norm_squared()
        }
        fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
            y * self.a + x * self.q
        }
        fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
            x * self.a - y * self.c
        }
        fn hess_xx_vec(&self, _: &Vector, _: &Vector, v: &Vector) -> Vector {
            v * self.q
        }
        fn hess_xy_vec(&self, _: &Vector, _: &Vector, w: &Vector) -> Vector {
            w * self.a
        }
        fn hess_yx_vec(&self, _: &Vector, _: &Vector, v: &Vector) -> Vector {
            v * self.a
        }
        fn hess_yy_vec(&self, _: &Vector, _: &Vector, w: &Vector) -> Vector {
            -w * self.c
        }
        fn constants(&self) -> SmoothnessConstants {
            SmoothnessConstants::new(self.c, self.c.max(self.a.abs() + self.q.abs()), 0.0).unwrap()
        }
    }

    fn zeros(n: usize) -> Vector {
        Vector::zeros(n)
    }

    #[test]
    fn yy_solve_unit_concavity() {
        let o = Bilinear { dim: 2, a: 0.0, q: 0.0, c: 1.0 };
        let z = yy_solve(&o, &zeros(2), &zeros(2), &Vector::from_vec(vec![2.0, 4.0]), 1e-12).unwrap();
        assert_eq!(z.as_slice(), &[-2.0, -4.0]);
    }

    #[test]
    fn yy_solve_scalar() {
        let o = Bilinear { dim: 1, a: 0.0, q: 0.0, c: 5.0 };
        let z = yy_solve(&o, &zeros(1), &zeros(1), &Vector::from_vec(vec![10.0]), 1e-12).unwrap();
        assert!((z[0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn yy_solve_rejects_nonpositive_tol() {
        let o = Bilinear { dim: 1, a: 0.0, q: 0.0, c: 5.0 };
        assert!(yy_solve(&o, &zeros(1), &zeros(1), &Vector::from_vec(vec![1.0]), 0.0).is_err());
    }

    #[test]
    fn h_vec_bilinear_by_hand() {
        // H = 0 - 1 * (-1)^{-1} * 1 = 1
        let o = Bilinear { dim: 1, a: 1.0, q: 0.0, c: 1.0 };
        let hv = h_vec(&o, &zeros(1), &zeros(1), &Vector::from_vec(vec![1.0]), 1e-12).unwrap();
        assert!((hv[0] - 1.0).abs() < 1e-14);
        let h = h_dense(&o, &zeros(1), &zeros(1)).unwrap();
        assert!((h[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn h_vec_without_coupling_is_hess_xx() {
        let o = Bilinear { dim: 3, a: 0.0, q: 2.5, c: 1.0 };
        let v = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let hv = h_vec(&o, &zeros(3), &zeros(3), &v, 1e-12).unwrap();
        assert!((hv - v * 2.5).norm() < 1e-14);
    }

    #[test]
    fn dense_threshold_enforced() {
        let o = Bilinear { dim: 4, a: 1.0, q: 0.0, c: 1.0 };
        assert!(matches!(
            h_dense_with_limit(&o, &zeros(4), &zeros(4), 3),
            Err(Error::DimensionTooLarge { n: 4, limit: 3 })
        ));
    }

    #[test]
    fn schur_counts_applications() {
        let o = Bilinear { dim: 3, a: 1.0, q: 0.0, c: 2.0 };
        let (x, y) = (zeros(3), zeros(3));
        let op = SchurOperator::new(&o, &x, &y, 1e-12).unwrap();
        op.to_dense(10).unwrap();
        assert_eq!(op.applications(), 3);
    }

    #[test]
    fn generic_constants_follow_formulas() {
        let c = SmoothnessConstants::new(0.5, 2.0, 3.0).unwrap();
        assert_eq!(c.kappa(), 4.0);
        assert_eq!(c.l1(), 10.0);
        assert_eq!(c.lh(), 75.0);
        assert_eq!(c.l2(), 375.0);
        assert!(c.l2() >= c.lh() && c.lh() >= c.ell2());
    }

    #[test]
    fn constants_reject_bad_inputs() {
        assert!(SmoothnessConstants::new(0.0, 1.0, 1.0).is_err());
        assert!(SmoothnessConstants::new(1.0, 0.5, 1.0).is_err());
        assert!(SmoothnessConstants::new(1.0, 1.0, -1.0).is_err());
        let c = SmoothnessConstants::new(1.0, 2.0, 1.0).unwrap();
        assert!(c
            .with_value_bounds(ValueBounds { l1: 1.0, lh: 2.0, l2: 1.0 })
            .is_err());
        assert!(c
            .with_value_bounds(ValueBounds { l1: 1e9, lh: 1.0, l2: 1.0 })
            .is_err());
        let tight = c.with_value_bounds(ValueBounds { l1: 2.0, lh: 1.0, l2: 1.5 }).unwrap();
        assert_eq!(tight.l2(), 1.5);
        assert_eq!(tight.generic_l2(), 27.0);
    }
}
