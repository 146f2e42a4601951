//! Signal reconstruction on a selected support.
//!
//! Solves `x̂_S = (A_S^T A_S + λI)^{-1} A_S^T y` on the selected columns
//! and zero-fills the complement. The normal equations go through
//! Cholesky by default; a conjugate-gradient path is available for large
//! supports.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative residual at which the CG path stops.
pub const CG_REL_TOL: f64 = 1e-10;
/// CG iteration cap as a multiple of the support size.
pub const CG_ITER_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Direct,
    Cg,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Direct => "direct",
            Solver::Cg => "cg",
        }
    }
}

/// A reconstructed signal.
#[derive(Debug, Clone)]
pub struct RecoveredSignal {
    /// Full-length estimate, zero off the support.
    pub x_hat: Array1<f64>,
    pub support: Vec<usize>,
    pub solver: Solver,
    pub ridge_lambda: f64,
    /// `||A x̂ − y||_2`.
    pub residual_norm: f64,
}

/// Scatter support-coordinates into a full-length zero vector.
pub fn assemble_full_signal(
    x_on_support: &Array1<f64>,
    support: &[usize],
    n: usize,
) -> Result<Array1<f64>> {
    if x_on_support.len() != support.len() {
        return Err(Error::Parameter(format!(
            "{} coefficients for {} support indices",
            x_on_support.len(),
            support.len()
        )));
    }
    let mut full = Array1::<f64>::zeros(n);
    for (&idx, &v) in support.iter().zip(x_on_support.iter()) {
        if idx >= n {
            return Err(Error::IndexOutOfBounds { index: idx, len: n });
        }
        full[idx] = v;
    }
    Ok(full)
}

/// Least-squares (or ridge) refit restricted to `support`.
///
/// With `ridge_lambda = 0` the support must have at most `m` columns and
/// an invertible Gram; both violations produce a rank-deficiency error
/// suggesting a positive ridge. The CG path solves the same normal
/// equations to a relative residual of 1e-10 or `10·|S|` iterations and
/// returns the final iterate either way.
pub fn least_squares_on_support(
    a: &Array2<f64>,
    y: &Array1<f64>,
    support: &[usize],
    ridge_lambda: f64,
    solver: Solver,
) -> Result<RecoveredSignal> {
    let (m, n) = a.dim();
    if y.len() != m {
        return Err(Error::Parameter(format!(
            "matrix has {m} rows but y has length {}",
            y.len()
        )));
    }
    if ridge_lambda < 0.0 {
        return Err(Error::Parameter(format!(
            "ridge_lambda must be >= 0, got {ridge_lambda}"
        )));
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if let Some(&bad) = support.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfBounds { index: bad, len: n });
    }
    let k = support.len();
    if k > m && ridge_lambda == 0.0 {
        return Err(Error::RankDeficient(format!(
            "support size {k} exceeds m = {m} with ridge_lambda = 0"
        )));
    }

    let x_hat = if k == 0 {
        Array1::zeros(n)
    } else {
        let mut sub = Array2::<f64>::zeros((m, k));
        for (c, &idx) in support.iter().enumerate() {
            sub.column_mut(c).assign(&a.column(idx));
        }
        let mut gram = sub.t().dot(&sub);
        for j in 0..k {
            gram[[j, j]] += ridge_lambda;
        }
        let rhs = sub.t().dot(y);
        let coeffs = match solver {
            Solver::Direct => linalg::cholesky(&gram)
                .map(|l| linalg::cholesky_solve(&l, &rhs))
                .map_err(|_| {
                    Error::RankDeficient(format!(
                        "normal matrix on a support of size {k} is singular"
                    ))
                })?,
            Solver::Cg => linalg::conjugate_gradient(&gram, &rhs, CG_REL_TOL, CG_ITER_FACTOR * k).x,
        };
        assemble_full_signal(&coeffs, &support, n)?
    };

    let residual = y - &a.dot(&x_hat);
    Ok(RecoveredSignal {
        x_hat,
        support,
        solver,
        ridge_lambda,
        residual_norm: residual.dot(&residual).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_block_correlated_matrix, generate_sparse_signal, trial_rng};
    use ndarray::array;

    #[test]
    fn identity_design_plain_least_squares() {
        let a = Array2::<f64>::eye(2);
        let y = array![2.0, 5.0];
        let rec = least_squares_on_support(&a, &y, &[0], 0.0, Solver::Direct).unwrap();
        assert!((rec.x_hat[0] - 2.0).abs() < 1e-14);
        assert_eq!(rec.x_hat[1], 0.0);
        assert!((rec.residual_norm - 5.0).abs() < 1e-14);
    }

    #[test]
    fn identity_design_ridge_shrinks() {
        // (1 + 1)^{-1} * 2 = 1
        let a = Array2::<f64>::eye(2);
        let y = array![2.0, 5.0];
        let rec = least_squares_on_support(&a, &y, &[0], 1.0, Solver::Direct).unwrap();
        assert!((rec.x_hat[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_support_gives_zero_vector() {
        let a = Array2::<f64>::eye(3);
        let y = array![1.0, 2.0, 3.0];
        let rec = least_squares_on_support(&a, &y, &[], 0.0, Solver::Direct).unwrap();
        assert!(rec.x_hat.iter().all(|&v| v == 0.0));
        assert!((rec.residual_norm - y.dot(&y).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn cg_agrees_with_direct() {
        for seed in 0..20u64 {
            let mut rng = trial_rng(seed, 5);
            let a = generate_block_correlated_matrix(50, 30, 5, 0.6, &mut rng).unwrap();
            let sig = generate_sparse_signal(30, 8, &mut rng).unwrap();
            let y = a.entries.dot(&sig.values);
            let support = sig.support.clone();
            let direct =
                least_squares_on_support(&a.entries, &y, &support, 0.0, Solver::Direct).unwrap();
            let cg = least_squares_on_support(&a.entries, &y, &support, 0.0, Solver::Cg).unwrap();
            let diff = &direct.x_hat - &cg.x_hat;
            let err = diff.dot(&diff).sqrt();
            assert!(err < 1e-8, "seed {seed}: direct vs cg differ by {err}");
        }
    }

    #[test]
    fn normal_equation_orthogonality() {
        let mut rng = trial_rng(81, 0);
        let a = generate_block_correlated_matrix(40, 25, 5, 0.6, &mut rng).unwrap();
        let sig = generate_sparse_signal(25, 6, &mut rng).unwrap();
        let mut y = a.entries.dot(&sig.values);
        for (i, v) in y.iter_mut().enumerate() {
            *v += 0.01 * (i as f64).cos();
        }
        let rec =
            least_squares_on_support(&a.entries, &y, &sig.support, 0.0, Solver::Direct).unwrap();
        let r = &y - &a.entries.dot(&rec.x_hat);
        for &j in &sig.support {
            let inner = a.entries.column(j).dot(&r);
            assert!(inner.abs() <= 1e-8, "A_S^T r != 0 at {j}: {inner}");
        }
        // stored residual matches recomputation
        assert!((rec.residual_norm - r.dot(&r).sqrt()).abs() <= 1e-10);
        // projection bound
        assert!(rec.residual_norm <= y.dot(&y).sqrt() + 1e-12);
    }

    #[test]
    fn ridge_norm_monotone_in_lambda() {
        let mut rng = trial_rng(82, 0);
        let a = generate_block_correlated_matrix(20, 10, 5, 0.6, &mut rng).unwrap();
        let sig = generate_sparse_signal(10, 4, &mut rng).unwrap();
        let y = a.entries.dot(&sig.values);
        let mut last = f64::INFINITY;
        for &lambda in &[0.0, 0.01, 0.1, 1.0, 10.0] {
            let rec =
                least_squares_on_support(&a.entries, &y, &sig.support, lambda, Solver::Direct)
                    .unwrap();
            let norm = rec.x_hat.dot(&rec.x_hat).sqrt();
            assert!(norm <= last + 1e-12, "norm rose at lambda = {lambda}");
            last = norm;
        }
    }

    #[test]
    fn oversized_support_needs_ridge() {
        let mut rng = trial_rng(83, 0);
        let a = generate_block_correlated_matrix(4, 8, 5, 0.6, &mut rng).unwrap();
        let y = array![1.0, 2.0, 3.0, 4.0];
        let all: Vec<usize> = (0..8).collect();
        assert!(matches!(
            least_squares_on_support(&a.entries, &y, &all, 0.0, Solver::Direct),
            Err(Error::RankDeficient(_))
        ));
        // a positive ridge makes it solvable
        let rec = least_squares_on_support(&a.entries, &y, &all, 0.1, Solver::Direct).unwrap();
        assert_eq!(rec.support.len(), 8);
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let mut a = Array2::<f64>::zeros((3, 2));
        a[[0, 0]] = 1.0;
        a[[0, 1]] = 1.0;
        let y = array![1.0, 0.0, 0.0];
        assert!(matches!(
            least_squares_on_support(&a, &y, &[0, 1], 0.0, Solver::Direct),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn assemble_scatter_and_bounds() {
        let x = array![7.0];
        let full = assemble_full_signal(&x, &[2], 5).unwrap();
        assert_eq!(full.to_vec(), vec![0.0, 0.0, 7.0, 0.0, 0.0]);

        let empty = assemble_full_signal(&Array1::zeros(0), &[], 3).unwrap();
        assert!(empty.iter().all(|&v| v == 0.0));

        assert!(matches!(
            assemble_full_signal(&x, &[5], 5),
            Err(Error::IndexOutOfBounds { .. })
        ));
        assert!(assemble_full_signal(&x, &[0, 1], 5).is_err());
    }

    #[test]
    fn assemble_roundtrip_identity_on_support() {
        let mut rng = trial_rng(84, 0);
        let sig = generate_sparse_signal(12, 4, &mut rng).unwrap();
        let gathered = Array1::from_iter(sig.support.iter().map(|&j| sig.values[j]));
        let full = assemble_full_signal(&gathered, &sig.support, 12).unwrap();
        for j in 0..12 {
            assert_eq!(full[j], sig.values[j]);
        }
    }
}
