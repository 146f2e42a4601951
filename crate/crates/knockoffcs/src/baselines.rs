//! Baseline sparse-recovery methods: LASSO and orthogonal matching pursuit.
//!
//! The LASSO objective here is `(1/(2m))·||y − A b||_2^2 + λ·||b||_1`,
//! i.e. the residual term is averaged over the m samples. λ is therefore
//! scale-dependent: the all-zero solution is optimal exactly when
//! `λ >= ||A^T y||_inf / m`. Keep this convention in mind when porting λ
//! values from tools that use an unscaled residual.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;

/// Convergence tolerance on the maximum coordinate change per sweep.
pub const LASSO_DEFAULT_TOL: f64 = 1e-8;
/// Sweep cap for coordinate descent.
pub const LASSO_DEFAULT_MAX_ITER: usize = 10_000;
/// Magnitude above which a LASSO coefficient counts as support.
pub const LASSO_SUPPORT_EPS: f64 = 1e-10;
/// Residual norm at which OMP stops early.
const OMP_RESIDUAL_TOL: f64 = 1e-12;

/// A fitted LASSO solution.
#[derive(Debug, Clone)]
pub struct LassoFit {
    pub coefficients: Array1<f64>,
    pub lambda: f64,
    /// Completed coordinate-descent sweeps.
    pub iterations: usize,
    pub converged: bool,
    /// `(1/(2m))||y − A b||_2^2 + λ||b||_1` at the returned coefficients.
    pub objective: f64,
}

/// An orthogonal matching pursuit solution.
#[derive(Debug, Clone)]
pub struct OmpFit {
    /// Selected indices in selection order.
    pub support: Vec<usize>,
    /// Full-length coefficient vector, zero off the support.
    pub coefficients: Array1<f64>,
    /// Sparsity budget the run was given.
    pub k: usize,
}

pub fn lasso_objective(a: &Array2<f64>, y: &Array1<f64>, b: &Array1<f64>, lambda: f64) -> f64 {
    let r = y - &a.dot(b);
    let m = a.nrows() as f64;
    r.dot(&r) / (2.0 * m) + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent for the LASSO.
///
/// Each coordinate update is the exact minimizer of the objective in that
/// coordinate (soft thresholding with the per-coordinate curvature
/// `||A_j||^2 / m`, so columns need not be unit-norm; zero columns are
/// skipped). The fit converges when the largest coordinate change in a
/// sweep is at most `tol`; if `max_iter` sweeps run out first the fit is
/// returned with `converged = false`.
pub fn lasso_coordinate_descent(
    a: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoFit> {
    if lambda <= 0.0 {
        return Err(Error::Parameter(format!(
            "lasso lambda must be > 0, got {lambda}"
        )));
    }
    let (m, n) = a.dim();
    if y.len() != m {
        return Err(Error::Parameter(format!(
            "matrix has {m} rows but y has length {}",
            y.len()
        )));
    }
    let m_f = m as f64;
    let col_sq: Vec<f64> = (0..n).map(|j| a.column(j).dot(&a.column(j))).collect();
    let mut b = Array1::<f64>::zeros(n);
    let mut residual = y.clone();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_iter {
        sweeps += 1;
        let mut max_delta = 0.0_f64;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                continue;
            }
            let curvature = col_sq[j] / m_f;
            let rho = a.column(j).dot(&residual) / m_f + curvature * b[j];
            let new = soft_threshold(rho, lambda) / curvature;
            let delta = new - b[j];
            if delta != 0.0 {
                residual.scaled_add(-delta, &a.column(j));
                b[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta <= tol {
            converged = true;
            break;
        }
    }
    let objective = lasso_objective(a, y, &b, lambda);
    Ok(LassoFit {
        coefficients: b,
        lambda,
        iterations: sweeps,
        converged,
        objective,
    })
}

/// Indices with `|b_j| > eps`.
pub fn lasso_support(fit: &LassoFit, eps: f64) -> Vec<usize> {
    fit.coefficients
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > eps)
        .map(|(j, _)| j)
        .collect()
}

/// Orthogonal matching pursuit with least-squares refitting.
///
/// At each step the unselected column with the largest absolute residual
/// correlation is added (ties broken toward the lowest index), the
/// coefficients are refit by least squares on the selected set, and the
/// residual is updated. Stops after `k` steps or when the residual norm
/// drops below 1e-12.
pub fn omp(a: &Array2<f64>, y: &Array1<f64>, k: usize) -> Result<OmpFit> {
    let (m, n) = a.dim();
    if y.len() != m {
        return Err(Error::Parameter(format!(
            "matrix has {m} rows but y has length {}",
            y.len()
        )));
    }
    if k > m.min(n) {
        return Err(Error::Parameter(format!(
            "omp budget k = {k} exceeds min(m, n) = {}",
            m.min(n)
        )));
    }
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut selected = vec![false; n];
    let mut coeffs_on_support: Array1<f64> = Array1::zeros(0);
    let mut residual = y.clone();
    for _ in 0..k {
        if residual.dot(&residual).sqrt() <= OMP_RESIDUAL_TOL {
            break;
        }
        let mut best_j = None;
        let mut best_corr = f64::NEG_INFINITY;
        for j in 0..n {
            if selected[j] {
                continue;
            }
            let corr = a.column(j).dot(&residual).abs();
            if corr > best_corr {
                best_corr = corr;
                best_j = Some(j);
            }
        }
        let j = match best_j {
            Some(j) => j,
            None => break,
        };
        selected[j] = true;
        support.push(j);

        let k_cur = support.len();
        let mut sub = Array2::<f64>::zeros((m, k_cur));
        for (c, &idx) in support.iter().enumerate() {
            sub.column_mut(c).assign(&a.column(idx));
        }
        let gram = sub.t().dot(&sub);
        let rhs = sub.t().dot(y);
        // duplicate or dependent columns make the Gram singular; fall back
        // to the minimum-norm solution
        coeffs_on_support = match linalg::solve_spd(&gram, &rhs) {
            Ok(x) => x,
            Err(_) => linalg::solve_sym_pinv(&gram, &rhs, 1e-12)?,
        };
        residual = y - &sub.dot(&coeffs_on_support);
    }
    let mut coefficients = Array1::<f64>::zeros(n);
    for (c, &idx) in support.iter().enumerate() {
        coefficients[idx] = coeffs_on_support[c];
    }
    Ok(OmpFit {
        support,
        coefficients,
        k,
    })
}
