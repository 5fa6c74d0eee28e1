//! The W-shaped synthetic problem
//!
//! ```text
//! f(x, y) = w(x3) - y1^2 / 40 + x1 y1 - 5 y2^2 / 2 + x2 y2
//! ```
//!
//! with `w` a six-piece cubic whose minima sit at `x3 = +-(L + 1) sqrt(eps)`
//! and a strict saddle of `F` at the origin. Everything has a closed form:
//! `y*(x) = (20 x1, x2 / 5)`, `F(x) = w(x3) + 10 x1^2 + x2^2 / 10`.
//!
//! Constants shipped with the problem:
//!
//! - `mu = 1/20`, the smaller curvature of the concave y-block.
//! - `ell1 = (5 + sqrt(29)) / 2`, the spectral norm of the `(x2, y2)` block
//!   `[[0, 1], [1, -5]]`. It dominates the `(x1, y1)` block and `|w''(x3)|`
//!   while `|x3| <= 3`.
//! - `ell2 = 2`: `w''` is continuous and piecewise linear with slopes in
//!   `{-2, 0, 2}`; every other second derivative is constant.
//! - Value-function bounds `L1 = 20` (`||diag(20, 1/5, w'')||` on the same
//!   region) and `L_H = L2 = 2`, since `H(x, y) = diag(20, 1/5, w''(x3))`
//!   does not depend on `y`.

use serde::{Deserialize, Serialize};

use crate::oracle::{MinimaxOracle, SmoothnessConstants, ValueBounds, ValueFunction};
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WToyParams {
    /// Slope parameter.
    pub eps_w: f64,
    /// Length parameter, `> 1`.
    pub l_w: f64,
}

impl Default for WToyParams {
    fn default() -> Self {
        Self { eps_w: 0.01, l_w: 5.0 }
    }
}

impl WToyParams {
    /// `c_eps = (3 L + 1) eps^{3/2} / 3`.
    pub fn c_eps(&self) -> f64 {
        (3.0 * self.l_w + 1.0) * self.eps_w.powf(1.5) / 3.0
    }

    /// The five interior knots `-L sqrt(eps), -sqrt(eps), 0, sqrt(eps), L sqrt(eps)`.
    pub fn knots(&self) -> [f64; 5] {
        let r = self.eps_w.sqrt();
        [-self.l_w * r, -r, 0.0, r, self.l_w * r]
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_w > 0.0 && self.eps_w.is_finite()) {
            return Err(Error::Construction(format!("eps_w must be positive, got {}", self.eps_w)));
        }
        if !(self.l_w > 1.0 && self.l_w.is_finite()) {
            return Err(Error::Construction(format!("L_w must exceed 1, got {}", self.l_w)));
        }
        Ok(())
    }
}

/// `(w(x), w'(x), w''(x))`.
pub fn w_eval(p: &WToyParams, x: f64) -> (f64, f64, f64) {
    let e = p.eps_w;
    let r = e.sqrt();
    let l = p.l_w;
    let c = p.c_eps();
    if x <= -l * r {
        let z = x + (l + 1.0) * r;
        (r * z * z - z * z * z / 3.0 - c, 2.0 * r * z - z * z, 2.0 * r - 2.0 * z)
    } else if x <= -r {
        (e * x + e * r / 3.0, e, 0.0)
    } else if x <= 0.0 {
        (-r * x * x - x * x * x / 3.0, -2.0 * r * x - x * x, -2.0 * r - 2.0 * x)
    } else if x <= r {
        (-r * x * x + x * x * x / 3.0, -2.0 * r * x + x * x, -2.0 * r + 2.0 * x)
    } else if x <= l * r {
        (-e * x + e * r / 3.0, -e, 0.0)
    } else {
        let z = x - (l + 1.0) * r;
        (r * z * z + z * z * z / 3.0 - c, 2.0 * r * z + z * z, 2.0 * r + 2.0 * z)
    }
}

#[derive(Debug, Clone)]
pub struct WToy {
    params: WToyParams,
    constants: SmoothnessConstants,
}

pub fn make_wtoy(params: WToyParams) -> Result<WToy> {
    params.validate()?;
    let mu = 1.0 / 20.0;
    let ell1 = (5.0 + 29f64.sqrt()) / 2.0;
    let constants = SmoothnessConstants::new(mu, ell1, 2.0)?.with_value_bounds(ValueBounds {
        l1: 20.0,
        lh: 2.0,
        l2: 2.0,
    })?;
    Ok(WToy { params, constants })
}

impl WToy {
    pub fn params(&self) -> &WToyParams {
        &self.params
    }

    /// The two initial points `([0.1, 0.1, 0.1], 0)` and `([1, 0.1, 0.1], 0)`.
    pub fn reference_starts() -> [(Vector, Vector); 2] {
        [
            (Vector::from_vec(vec![0.1, 0.1, 0.1]), Vector::zeros(2)),
            (Vector::from_vec(vec![1.0, 0.1, 0.1]), Vector::zeros(2)),
        ]
    }
}

impl MinimaxOracle for WToy {
    fn dim_x(&self) -> usize {
        3
    }

    fn dim_y(&self) -> usize {
        2
    }

    fn value(&self, x: &Vector, y: &Vector) -> f64 {
        w_eval(&self.params, x[2]).0 - y[0] * y[0] / 40.0 + x[0] * y[0] - 2.5 * y[1] * y[1] + x[1] * y[1]
    }

    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        Vector::from_vec(vec![y[0], y[1], w_eval(&self.params, x[2]).1])
    }

    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
        Vector::from_vec(vec![x[0] - y[0] / 20.0, x[1] - 5.0 * y[1]])
    }

    fn hess_xx_vec(&self, x: &Vector, _y: &Vector, v: &Vector) -> Vector {
        Vector::from_vec(vec![0.0, 0.0, w_eval(&self.params, x[2]).2 * v[2]])
    }

    fn hess_xy_vec(&self, _x: &Vector, _y: &Vector, w: &Vector) -> Vector {
        Vector::from_vec(vec![w[0], w[1], 0.0])
    }

    fn hess_yx_vec(&self, _x: &Vector, _y: &Vector, v: &Vector) -> Vector {
        Vector::from_vec(vec![v[0], v[1]])
    }

    fn hess_yy_vec(&self, _x: &Vector, _y: &Vector, w: &Vector) -> Vector {
        Vector::from_vec(vec![-w[0] / 20.0, -5.0 * w[1]])
    }

    fn constants(&self) -> SmoothnessConstants {
        self.constants
    }

    fn closed_form(&self) -> Option<&dyn ValueFunction> {
        Some(self)
    }
}

impl ValueFunction for WToy {
    fn value(&self, x: &Vector) -> f64 {
        w_eval(&self.params, x[2]).0 + 10.0 * x[0] * x[0] + x[1] * x[1] / 10.0
    }

    fn grad(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![20.0 * x[0], x[1] / 5.0, w_eval(&self.params, x[2]).1])
    }

    fn hess(&self, x: &Vector) -> Matrix {
        Matrix::from_diagonal(&Vector::from_vec(vec![20.0, 0.2, w_eval(&self.params, x[2]).2]))
    }

    fn y_star(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![20.0 * x[0], x[1] / 5.0])
    }

    fn f_inf(&self) -> f64 {
        -self.params.c_eps()
    }
}
