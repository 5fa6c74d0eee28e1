//! Small dense and matrix-free linear algebra helpers.

use nalgebra::SymmetricEigen;

use crate::{Error, Matrix, Result, Vector};

/// A symmetric linear map on `R^dim`, applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &Vector) -> Result<Vector>;
}

impl LinearOperator for Matrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &Vector) -> Result<Vector> {
        Ok(self * v)
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: Vector,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradient for a symmetric positive-definite operator given as a
/// closure. Stops once `||A z - b|| <= tol * ||b||`.
pub fn conjugate_gradient<F>(apply: F, b: &Vector, tol: f64, max_iters: usize) -> Result<CgOutcome>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let b_norm = b.norm();
    let mut z = Vector::zeros(b.len());
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            solution: z,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let target = tol * b_norm;
    for it in 1..=max_iters {
        let ap = apply(&p)?;
        let curvature = p.dot(&ap);
        if curvature <= 0.0 {
            return Err(Error::NonConvergence {
                iters: it,
                residual: rr.sqrt() / b_norm,
                tol,
            });
        }
        let step = rr / curvature;
        z.axpy(step, &p, 1.0);
        r.axpy(-step, &ap, 1.0);
        let rr_next = r.dot(&r);
        if rr_next.sqrt() <= target {
            return Ok(CgOutcome {
                solution: z,
                iterations: it,
                relative_residual: rr_next.sqrt() / b_norm,
            });
        }
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
    }
    Err(Error::NonConvergence {
        iters: max_iters,
        residual: rr.sqrt() / b_norm,
        tol,
    })
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// ascending and eigenvectors reordered to match.
pub fn sorted_symmetric_eigen(m: &Matrix) -> Result<(Vector, Matrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::EigensolverFailure(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigensolverFailure("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::EigensolverFailure("QR iteration did not converge".into()))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Symmetric part `(M + M^T) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min(m: &Matrix) -> Result<f64> {
    Ok(sorted_symmetric_eigen(m)?.0[0])
}
