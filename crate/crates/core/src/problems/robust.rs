//! Smooth robust regression with adversarial feature perturbations:
//!
//! ```text
//! f(x, y) = (1/N) sum_i [ l(u(x)^T y_i, b_i) - lambda |y_i - a_i|^2 ]
//! ```
//!
//! `y = (y_1, ..., y_N)` stacks one perturbed feature vector per sample,
//! `l(z, b) = log(1 + exp(-b z))` is the logistic loss and
//! `u(x) = x / sqrt(1 + |x|^2)` keeps the predictor bounded so that every
//! derivative block stays Lipschitz. Since `|u| < 1` and `l'' <= 1/4`, the
//! y-block is strongly concave with `mu = (2 lambda - 1/4) / N`.
//!
//! `ell1` and `ell2` are heuristic: they assume `|y_i| <= max_i |a_i| + 1`,
//! which holds near `y*` for moderate `lambda`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::oracle::{MinimaxOracle, SmoothnessConstants};
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct RobustRegressionParams {
    /// `N x n` design; row `i` is the clean feature vector `a_i`.
    pub design: Matrix,
    /// Labels in `{-1, +1}`.
    pub labels: Vector,
    /// Perturbation penalty `lambda`.
    pub lambda_adv: f64,
}

impl RobustRegressionParams {
    /// Gaussian design with entries `N(0, 1/n)` and labels from a random
    /// planted predictor.
    pub fn random(n: usize, samples: usize, lambda_adv: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (n.max(1) as f64).sqrt();
        let design = Matrix::from_fn(samples, n, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
        let planted = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let labels = Vector::from_fn(samples, |i, _| {
            let noise: f64 = rng.sample::<f64, _>(StandardNormal) * 0.1;
            if design.row(i).transpose().dot(&planted) + noise >= 0.0 {
                1.0
            } else {
                -1.0
            }
        });
        Self {
            design,
            labels,
            lambda_adv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RobustRegression {
    p: RobustRegressionParams,
    constants: SmoothnessConstants,
}

pub fn make_robust_regression(params: RobustRegressionParams) -> Result<RobustRegression> {
    let (samples, n) = params.design.shape();
    if samples == 0 || n == 0 {
        return Err(Error::Construction("design must be non-empty".into()));
    }
    if params.labels.len() != samples {
        return Err(Error::Construction(format!(
            "{} labels for {samples} samples",
            params.labels.len()
        )));
    }
    if params.labels.iter().any(|&b| b != 1.0 && b != -1.0) {
        return Err(Error::Construction("labels must be +-1".into()));
    }
    let nf = samples as f64;
    let mu = (2.0 * params.lambda_adv - 0.25) / nf;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Construction(format!(
            "concavity margin 2 lambda - 1/4 must be positive, got lambda = {}",
            params.lambda_adv
        )));
    }
    let radius = params.design.row_iter().map(|r| r.norm()).fold(0.0, f64::max) + 1.0;
    let ell1 = (2.0 * params.lambda_adv + (1.0 + radius).powi(2)) / nf;
    let ell2 = (1.0 + radius).powi(3) / nf;
    let constants = SmoothnessConstants::new(mu, ell1.max(mu), ell2)?;
    Ok(RobustRegression { p: params, constants })
}

/// Per-sample quantities at `(x, y)`.
struct Local {
    u: Vector,
    s: f64,
    /// `z_i = u^T y_i`.
    z: Vec<f64>,
    /// `grad_x z_i = (y_i - u z_i) / s`.
    dz: Vec<Vector>,
    /// `l'(z_i, b_i)`.
    d1: Vec<f64>,
    /// `l''(z_i, b_i)`.
    d2: Vec<f64>,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl RobustRegression {
    pub fn params(&self) -> &RobustRegressionParams {
        &self.p
    }

    fn samples(&self) -> usize {
        self.p.design.nrows()
    }

    fn block<'a>(&self, y: &'a Vector, i: usize) -> nalgebra::DVectorView<'a, f64> {
        let n = self.dim_x();
        y.rows(i * n, n)
    }

    fn local(&self, x: &Vector, y: &Vector) -> Local {
        let s = (1.0 + x.norm_squared()).sqrt();
        let u = x / s;
        let mut out = Local {
            z: Vec::with_capacity(self.samples()),
            dz: Vec::with_capacity(self.samples()),
            d1: Vec::with_capacity(self.samples()),
            d2: Vec::with_capacity(self.samples()),
            u,
            s,
        };
        for i in 0..self.samples() {
            let yi = self.block(y, i);
            let z = out.u.dot(&yi);
            let b = self.p.labels[i];
            out.dz.push((yi - &out.u * z) / s);
            out.d1.push(-b * sigmoid(-b * z));
            out.d2.push(sigmoid(b * z) * sigmoid(-b * z));
            out.z.push(z);
        }
        out
    }

    /// `J v = (v - u (u^T v)) / s`, the Jacobian of `u(x)`.
    fn jac(l: &Local, v: &Vector) -> Vector {
        (v - &l.u * l.u.dot(v)) / l.s
    }
}

impl MinimaxOracle for RobustRegression {
    fn dim_x(&self) -> usize {
        self.p.design.ncols()
    }

    fn dim_y(&self) -> usize {
        self.p.design.nrows() * self.p.design.ncols()
    }

    fn value(&self, x: &Vector, y: &Vector) -> f64 {
        let s = (1.0 + x.norm_squared()).sqrt();
        let u = x / s;
        let mut total = 0.0;
        for i in 0..self.samples() {
            let yi = self.block(y, i);
            let z = u.dot(&yi);
            let pen = (yi - self.p.design.row(i).transpose()).norm_squared();
            total += softplus(-self.p.labels[i] * z) - self.p.lambda_adv * pen;
        }
        total / self.samples() as f64
    }

    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        let l = self.local(x, y);
        let mut g = Vector::zeros(self.dim_x());
        for i in 0..self.samples() {
            g.axpy(l.d1[i], &l.dz[i], 1.0);
        }
        g / self.samples() as f64
    }

    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
        let l = self.local(x, y);
        let n = self.dim_x();
        let nf = self.samples() as f64;
        let mut g = Vector::zeros(self.dim_y());
        for i in 0..self.samples() {
            let diff = self.block(y, i) - self.p.design.row(i).transpose();
            let gi = (&l.u * l.d1[i] - diff * (2.0 * self.p.lambda_adv)) / nf;
            g.rows_mut(i * n, n).copy_from(&gi);
        }
        g
    }

    fn hess_xx_vec(&self, x: &Vector, y: &Vector, v: &Vector) -> Vector {
        let l = self.local(x, y);
        let uv = l.u.dot(v);
        let jv = Self::jac(&l, v);
        let mut out = Vector::zeros(self.dim_x());
        for i in 0..self.samples() {
            let dzv = l.dz[i].dot(v);
            out.axpy(l.d2[i] * dzv, &l.dz[i], 1.0);
            // Hess_x z_i v = -(z_i J v + u (dz_i^T v) + dz_i (u^T v)) / s
            let hz = -(&jv * l.z[i] + &l.u * dzv + &l.dz[i] * uv) / l.s;
            out.axpy(l.d1[i], &hz, 1.0);
        }
        out / self.samples() as f64
    }

    fn hess_xy_vec(&self, x: &Vector, y: &Vector, w: &Vector) -> Vector {
        let l = self.local(x, y);
        let mut out = Vector::zeros(self.dim_x());
        for i in 0..self.samples() {
            let wi = self.block(w, i).into_owned();
            out.axpy(l.d2[i] * l.u.dot(&wi), &l.dz[i], 1.0);
            out.axpy(l.d1[i], &Self::jac(&l, &wi), 1.0);
        }
        out / self.samples() as f64
    }

    fn hess_yx_vec(&self, x: &Vector, y: &Vector, v: &Vector) -> Vector {
        let l = self.local(x, y);
        let n = self.dim_x();
        let nf = self.samples() as f64;
        let jv = Self::jac(&l, v);
        let mut out = Vector::zeros(self.dim_y());
        for i in 0..self.samples() {
            let bi = (&l.u * (l.d2[i] * l.dz[i].dot(v)) + &jv * l.d1[i]) / nf;
            out.rows_mut(i * n, n).copy_from(&bi);
        }
        out
    }

    fn hess_yy_vec(&self, x: &Vector, y: &Vector, w: &Vector) -> Vector {
        let l = self.local(x, y);
        let n = self.dim_x();
        let nf = self.samples() as f64;
        let mut out = Vector::zeros(self.dim_y());
        for i in 0..self.samples() {
            let wi = self.block(w, i);
            let bi = (&l.u * (l.d2[i] * l.u.dot(&wi)) - wi * (2.0 * self.p.lambda_adv)) / nf;
            out.rows_mut(i * n, n).copy_from(&bi);
        }
        out
    }

    fn constants(&self) -> SmoothnessConstants {
        self.constants
    }
}
