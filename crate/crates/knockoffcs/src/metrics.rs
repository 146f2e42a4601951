//! Recovery-quality metrics and conditioning diagnostics.
//!
//! Set conventions: the empty estimated support has FDP 0 (the `∨1`
//! denominator guard) and F1 0; the cross-coherence of an empty block is
//! 0. Power is undefined for an empty true support and errors instead.

use ndarray::{Array1, Array2};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg;

/// Recovery method tags used by the harness and CSV schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    KnockoffCs,
    Lasso,
    Omp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::KnockoffCs => "knockoffcs",
            Method::Lasso => "lasso",
            Method::Omp => "omp",
        }
    }

    pub const ALL: [Method; 3] = [Method::KnockoffCs, Method::Lasso, Method::Omp];
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "knockoffcs" => Ok(Method::KnockoffCs),
            "lasso" => Ok(Method::Lasso),
            "omp" => Ok(Method::Omp),
            other => Err(Error::Parse(format!(
                "unknown method '{other}' (expected knockoffcs, lasso or omp)"
            ))),
        }
    }
}

/// Per-(instance, method) evaluation record.
#[derive(Debug, Clone)]
pub struct TrialMetrics {
    pub fdp: f64,
    pub power: f64,
    pub f1: f64,
    pub relative_error: f64,
    pub measurement_error: f64,
    pub support_size: usize,
    pub method: Method,
    pub runtime_ms: f64,
}

/// Conditioning diagnostics for a recovered support.
#[derive(Debug, Clone, Copy)]
pub struct AssumptionReport {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub gamma: f64,
    pub delta_min: f64,
}

fn as_set(indices: &[usize]) -> HashSet<usize> {
    indices.iter().copied().collect()
}

/// `|Ŝ \ S| / max(|Ŝ|, 1)`.
pub fn fdp(s_hat: &[usize], s_true: &[usize]) -> f64 {
    let hat = as_set(s_hat);
    if hat.is_empty() {
        return 0.0;
    }
    let truth = as_set(s_true);
    let false_count = hat.difference(&truth).count();
    false_count as f64 / hat.len() as f64
}

/// True positive rate `|Ŝ ∩ S| / |S|`; errors when `S` is empty.
pub fn power_tpr(s_hat: &[usize], s_true: &[usize]) -> Result<f64> {
    let truth = as_set(s_true);
    if truth.is_empty() {
        return Err(Error::EmptySupport("power is undefined for S = ∅".into()));
    }
    let hat = as_set(s_hat);
    Ok(hat.intersection(&truth).count() as f64 / truth.len() as f64)
}

/// Harmonic mean of precision (`1 − fdp`) and recall (power); 0 when
/// either the estimated support is empty or precision + recall is 0.
pub fn f1(s_hat: &[usize], s_true: &[usize]) -> f64 {
    let hat = as_set(s_hat);
    let truth = as_set(s_true);
    if hat.is_empty() || truth.is_empty() {
        return 0.0;
    }
    let tp = hat.intersection(&truth).count() as f64;
    let precision = tp / hat.len() as f64;
    let recall = tp / truth.len() as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// `||x̂ − x||_2 / ||x||_2`; errors when the true signal is zero.
pub fn relative_error(x_hat: &Array1<f64>, x_true: &Array1<f64>) -> Result<f64> {
    let norm = x_true.dot(x_true).sqrt();
    if norm == 0.0 {
        return Err(Error::Parameter(
            "relative error is undefined for a zero true signal".into(),
        ));
    }
    let diff = x_hat - x_true;
    Ok(diff.dot(&diff).sqrt() / norm)
}

/// `||A x̂ − y||_2`.
pub fn measurement_error(a: &Array2<f64>, x_hat: &Array1<f64>, y: &Array1<f64>) -> f64 {
    let r = &a.dot(x_hat) - y;
    r.dot(&r).sqrt()
}

fn submatrix(a: &Array2<f64>, cols: &[usize]) -> Result<Array2<f64>> {
    let (m, n) = a.dim();
    let mut sub = Array2::<f64>::zeros((m, cols.len()));
    for (c, &idx) in cols.iter().enumerate() {
        if idx >= n {
            return Err(Error::IndexOutOfBounds { index: idx, len: n });
        }
        sub.column_mut(c).assign(&a.column(idx));
    }
    Ok(sub)
}

/// Extreme singular values of the column submatrix `A_{S'}`.
///
/// Computed as square roots of the extreme eigenvalues of the Gram
/// matrix. Errors when `|S'| > m` (the lower bound is then structurally
/// zero) or when the set is empty.
pub fn re_bounds(a: &Array2<f64>, s_prime: &[usize]) -> Result<(f64, f64)> {
    if s_prime.is_empty() {
        return Err(Error::EmptySupport(
            "restricted eigenvalue bounds need a nonempty index set".into(),
        ));
    }
    if s_prime.len() > a.nrows() {
        return Err(Error::Parameter(format!(
            "|S'| = {} exceeds m = {}: the restricted eigenvalue condition cannot hold",
            s_prime.len(),
            a.nrows()
        )));
    }
    let sub = submatrix(a, s_prime)?;
    let gram = sub.t().dot(&sub);
    let eigs = linalg::symmetric_eigenvalues(&gram)?;
    let k = eigs.len();
    Ok((eigs[0].max(0.0).sqrt(), eigs[k - 1].max(0.0).sqrt()))
}

/// Spectral norm of the cross-Gram block `A_{S_c}^T A_{S_f}` between two
/// disjoint column sets; 0 when either set is empty.
pub fn coherence_gamma(a: &Array2<f64>, s_c: &[usize], s_f: &[usize]) -> Result<f64> {
    let set_c = as_set(s_c);
    if s_f.iter().any(|j| set_c.contains(j)) {
        return Err(Error::Parameter(
            "coherence requires disjoint index sets".into(),
        ));
    }
    if s_c.is_empty() || s_f.is_empty() {
        return Ok(0.0);
    }
    let sub_c = submatrix(a, s_c)?;
    let sub_f = submatrix(a, s_f)?;
    let cross = sub_c.t().dot(&sub_f);
    let gram = cross.t().dot(&cross);
    let eigs = linalg::symmetric_eigenvalues(&gram)?;
    Ok(eigs[eigs.len() - 1].max(0.0).sqrt())
}

impl AssumptionReport {
    /// Package the conditioning diagnostics of an estimated support:
    /// restricted-eigenvalue bounds on `Ŝ`, cross-coherence between its
    /// correct and false parts, and the signal-interaction margin of the
    /// knockoff pair.
    pub fn compute(
        a: &Array2<f64>,
        knockoff: &Array2<f64>,
        signal: &crate::model::SparseSignal,
        s_hat: &[usize],
    ) -> Result<AssumptionReport> {
        let (kappa_min, kappa_max) = re_bounds(a, s_hat)?;
        let truth = as_set(&signal.support);
        let correct: Vec<usize> = s_hat.iter().copied().filter(|j| truth.contains(j)).collect();
        let false_hits: Vec<usize> = s_hat
            .iter()
            .copied()
            .filter(|j| !truth.contains(j))
            .collect();
        let gamma = coherence_gamma(a, &correct, &false_hits)?;
        let (_, _, delta_min) = crate::knockoff::assumption_margin(a, knockoff, signal)?;
        Ok(AssumptionReport {
            kappa_min,
            kappa_max,
            gamma,
            delta_min,
        })
    }
}
