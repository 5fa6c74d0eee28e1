//! Quadratic minimax family
//! `f(x, y) = x^T Q x / 2 + x^T C y - mu_y |y|^2 / 2 + b_x^T x + b_y^T y`
//! with closed-form `F(x) = x^T (Q + C C^T / mu_y) x / 2 + affine`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{sorted_symmetric_eigen, symmetrize};
use crate::oracle::{MinimaxOracle, SmoothnessConstants, ValueBounds, ValueFunction};
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMinimaxParams {
    pub q: Matrix,
    pub c: Matrix,
    pub mu_y: f64,
    pub b_x: Vector,
    pub b_y: Vector,
    /// Hessian Lipschitz constant reported for the problem. Any positive
    /// value is valid because every Hessian block is constant.
    pub ell2: f64,
}

impl QuadraticMinimaxParams {
    /// Random instance whose value Hessian `Q + C C^T / mu_y` has spectrum in
    /// `[0.5, 5]` while `Q` itself is typically indefinite.
    pub fn random(n: usize, m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |rows: usize, cols: usize| Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mu_y = 1.0;
        let c = gauss(n, m) / (m as f64).sqrt();
        let (basis, _) = gauss(n, n).qr().unpack();
        let spectrum = Vector::from_fn(n, |i, _| 0.5 + 4.5 * i as f64 / (n.max(2) - 1) as f64);
        let p = &basis * Matrix::from_diagonal(&spectrum) * basis.transpose();
        let q = symmetrize(&(p - &c * c.transpose() / mu_y));
        let b_x = gauss(n, 1).column(0) * 0.5;
        let b_y = gauss(m, 1).column(0) * 0.5;
        Self {
            q,
            c,
            mu_y,
            b_x,
            b_y,
            ell2: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticMinimax {
    p: QuadraticMinimaxParams,
    /// `Q + C C^T / mu_y`.
    value_hess: Matrix,
    x_star: Option<Vector>,
    f_inf: f64,
    constants: SmoothnessConstants,
}

pub fn make_quadratic(params: QuadraticMinimaxParams) -> Result<QuadraticMinimax> {
    let n = params.q.nrows();
    let m = params.c.ncols();
    if params.q.ncols() != n || params.c.nrows() != n || params.b_x.len() != n || params.b_y.len() != m {
        return Err(Error::Construction("inconsistent quadratic dimensions".into()));
    }
    if (&params.q - params.q.transpose()).amax() > 1e-12 * params.q.amax().max(1.0) {
        return Err(Error::Construction("Q must be symmetric".into()));
    }
    if !(params.mu_y > 0.0) {
        return Err(Error::Construction(format!("mu_y must be positive, got {}", params.mu_y)));
    }
    if !(params.ell2 > 0.0) {
        return Err(Error::Construction(format!("ell2 must be positive, got {}", params.ell2)));
    }
    let value_hess = symmetrize(&(&params.q + &params.c * params.c.transpose() / params.mu_y));

    let mut joint = Matrix::zeros(n + m, n + m);
    joint.view_mut((0, 0), (n, n)).copy_from(&params.q);
    joint.view_mut((0, n), (n, m)).copy_from(&params.c);
    joint.view_mut((n, 0), (m, n)).copy_from(&params.c.transpose());
    joint.view_mut((n, n), (m, m)).fill_diagonal(-params.mu_y);
    let (joint_eigs, _) = sorted_symmetric_eigen(&joint)?;
    let ell1 = joint_eigs[0].abs().max(joint_eigs[n + m - 1].abs()).max(params.mu_y);

    let (value_eigs, _) = sorted_symmetric_eigen(&value_hess)?;
    let l1 = value_eigs[0].abs().max(value_eigs[n - 1].abs()).max(f64::MIN_POSITIVE);
    let constants = SmoothnessConstants::new(params.mu_y, ell1, params.ell2)?.with_value_bounds(ValueBounds {
        l1,
        lh: params.ell2,
        l2: params.ell2,
    })?;

    let mut out = QuadraticMinimax {
        p: params,
        value_hess,
        x_star: None,
        f_inf: f64::NEG_INFINITY,
        constants,
    };
    if value_eigs[0] > 0.0 {
        let rhs = -(&out.p.b_x + &out.p.c * &out.p.b_y / out.p.mu_y);
        let x_star = out
            .value_hess
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Construction("value Hessian is not positive definite".into()))?
            .solve(&rhs);
        out.f_inf = ValueFunction::value(&out, &x_star);
        out.x_star = Some(x_star);
    }
    Ok(out)
}

impl QuadraticMinimax {
    pub fn params(&self) -> &QuadraticMinimaxParams {
        &self.p
    }

    /// Minimizer of `F` when `F` is strongly convex.
    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }
}

impl MinimaxOracle for QuadraticMinimax {
    fn dim_x(&self) -> usize {
        self.p.q.nrows()
    }

    fn dim_y(&self) -> usize {
        self.p.c.ncols()
    }

    fn value(&self, x: &Vector, y: &Vector) -> f64 {
        0.5 * x.dot(&(&self.p.q * x)) + x.dot(&(&self.p.c * y)) - 0.5 * self.p.mu_y * y.norm_squared()
            + self.p.b_x.dot(x)
            + self.p.b_y.dot(y)
    }

    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        &self.p.q * x + &self.p.c * y + &self.p.b_x
    }

    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
        self.p.c.tr_mul(x) - y * self.p.mu_y + &self.p.b_y
    }

    fn hess_xx_vec(&self, _x: &Vector, _y: &Vector, v: &Vector) -> Vector {
        &self.p.q * v
    }

    fn hess_xy_vec(&self, _x: &Vector, _y: &Vector, w: &Vector) -> Vector {
        &self.p.c * w
    }

    fn hess_yx_vec(&self, _x: &Vector, _y: &Vector, v: &Vector) -> Vector {
        self.p.c.tr_mul(v)
    }

    fn hess_yy_vec(&self, _x: &Vector, _y: &Vector, w: &Vector) -> Vector {
        -w * self.p.mu_y
    }

    fn constants(&self) -> SmoothnessConstants {
        self.constants
    }

    fn closed_form(&self) -> Option<&dyn ValueFunction> {
        Some(self)
    }
}

impl ValueFunction for QuadraticMinimax {
    fn value(&self, x: &Vector) -> f64 {
        let s = self.p.c.tr_mul(x) + &self.p.b_y;
        0.5 * x.dot(&(&self.p.q * x)) + self.p.b_x.dot(x) + s.norm_squared() / (2.0 * self.p.mu_y)
    }

    fn grad(&self, x: &Vector) -> Vector {
        let s = self.p.c.tr_mul(x) + &self.p.b_y;
        &self.p.q * x + &self.p.b_x + &self.p.c * s / self.p.mu_y
    }

    fn hess(&self, _x: &Vector) -> Matrix {
        self.value_hess.clone()
    }

    fn y_star(&self, x: &Vector) -> Vector {
        (self.p.c.tr_mul(x) + &self.p.b_y) / self.p.mu_y
    }

    fn f_inf(&self) -> f64 {
        self.f_inf
    }
}
