//! Compares the Lanczos condition number of `G(alpha)` with the spectral
//! condition number of the regularized Newton system `H + eps_N I`.

use serde::{Deserialize, Serialize};

use super::exact::homogenized_dense;
use crate::linalg::sorted_symmetric_eigen;
use crate::{Matrix, Result, Vector};

/// Eigengaps below this make `kappa_L` infinite.
const DEGENERATE_GAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningReport {
    /// `(lambda_max(G) - lambda_1(G)) / (lambda_2(G) - lambda_1(G))`.
    pub kappa_l: f64,
    /// `(lambda_max(H) + eps_N) / (lambda_1(H) + eps_N)`, infinite when the
    /// denominator is not positive.
    pub kappa_newton: f64,
    /// Analytic upper bound on `kappa_l`.
    pub kappa_l_bound: f64,
    /// `eps_N / (||g||^2 / (lambda_max(H) + alpha) + alpha)`; the ratio bound
    /// up to its unspecified constant, reported with constant 1.
    pub ratio_bound: f64,
    pub eps_n: f64,
    /// `lambda_2(G) - lambda_1(G) < 1e-14`.
    pub degenerate: bool,
}

/// Dense conditioning diagnostics for small `n`.
pub fn conditioning_report(h: &Matrix, g: &Vector, alpha: f64, eps_n: f64) -> Result<ConditioningReport> {
    let (g_eigs, _) = sorted_symmetric_eigen(&homogenized_dense(h, g, alpha))?;
    let (h_eigs, _) = sorted_symmetric_eigen(h)?;
    let dim = g_eigs.len();
    let (l1, l2, lmax) = (g_eigs[0], g_eigs[1.min(dim - 1)], g_eigs[dim - 1]);
    let gap = l2 - l1;
    let degenerate = gap < DEGENERATE_GAP;
    let kappa_l = if degenerate { f64::INFINITY } else { (lmax - l1) / gap };

    let h_min = h_eigs[0];
    let h_max = h_eigs[h_eigs.len() - 1];
    let newton_den = h_min + eps_n;
    let kappa_newton = if newton_den <= 0.0 {
        f64::INFINITY
    } else {
        (h_max + eps_n) / newton_den
    };

    let g_sq = g.norm_squared();
    Ok(ConditioningReport {
        kappa_l,
        kappa_newton,
        kappa_l_bound: kappa_l_upper_bound(h_max, l1, g_sq, g.len(), alpha),
        ratio_bound: eps_n / (g_sq / (h_max + alpha) + alpha),
        eps_n,
        degenerate,
    })
}

/// `2 (lambda_max(H) - alpha - lambda_1(G)) /
///  (-lambda_max(H) + alpha + sqrt((lambda_max(H) + alpha)^2 + ||g||^2 / n))`.
pub fn kappa_l_upper_bound(h_max: f64, g_min_eig: f64, g_norm_sq: f64, n: usize, alpha: f64) -> f64 {
    let num = 2.0 * (h_max - alpha - g_min_eig);
    let s = h_max + alpha;
    // -h_max + alpha + sqrt(s^2 + q) rewritten to avoid cancellation when h_max >> alpha
    let q = g_norm_sq / n as f64;
    let den = 2.0 * alpha + q / (s + (s * s + q).sqrt());
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_column_slice(d))
    }

    #[test]
    fn spectrum_by_hand() {
        // G spectrum {-1, 0, 1}
        let rep = conditioning_report(&diag(&[0.0, 1.0]), &Vector::zeros(2), 1.0, 1.0).unwrap();
        assert!((rep.kappa_l - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_hessian() {
        let rep = conditioning_report(&diag(&[1.0, 1.0]), &Vector::zeros(2), 1.0, 1.0).unwrap();
        assert!((rep.kappa_l - 1.0).abs() < 1e-14);
        assert!((rep.kappa_newton - 1.0).abs() < 1e-14);
    }

    #[test]
    fn newton_blows_up_while_lanczos_stays_finite() {
        let g = Vector::from_vec(vec![0.5, 0.5]);
        for eps_n in [1e-4, 1e-8, 1e-12, 0.0] {
            let rep = conditioning_report(&diag(&[0.0, 2.0]), &g, 0.1, eps_n).unwrap();
            assert!(rep.kappa_l.is_finite());
            assert!(rep.kappa_newton >= 2.0 / eps_n.max(f64::MIN_POSITIVE) * 0.999);
        }
    }

    #[test]
    fn bound_expression_matches_direct_form() {
        let (h_max, l1, gsq, n, alpha): (f64, f64, f64, usize, f64) = (3.0, -0.7, 2.5, 4, 0.2);
        let direct = 2.0 * (h_max - alpha - l1) / (-h_max + alpha + ((h_max + alpha).powi(2) + gsq / n as f64).sqrt());
        let b = kappa_l_upper_bound(h_max, l1, gsq, n, alpha);
        assert!((b - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn bound_misses_the_unit_term_when_gradient_vanishes() {
        // With g = 0: kappa_L = 1 + lambda_max(H) / alpha while the bound
        // evaluates to lambda_max(H) / alpha.
        let rep = conditioning_report(&diag(&[0.0, 1.0]), &Vector::zeros(2), 1.0, 1e-8).unwrap();
        assert!((rep.kappa_l - 2.0).abs() < 1e-12);
        assert!((rep.kappa_l_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_smallest_eigenvalue_is_degenerate() {
        let rep = conditioning_report(&diag(&[-1.0, -1.0, 2.0]), &Vector::zeros(3), 0.5, 1.0).unwrap();
        assert!(rep.degenerate);
        assert!(rep.kappa_l.is_infinite());
    }
}
