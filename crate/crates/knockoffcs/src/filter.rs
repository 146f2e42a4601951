//! W-statistics, the data-driven threshold, and support selection.
//!
//! Each index `j` gets a statistic `W_j` contrasting the evidence carried
//! by the original column against its knockoff; large positive values
//! indicate real signal. The threshold `T` is the smallest candidate
//! `t > 0` at which the estimated false discovery proportion
//! `#{j : W_j <= -t} / max(#{j : W_j >= t}, 1)` drops to the target `q`,
//! and the selected support is `{j : W_j >= T}`.

use ndarray::{Array1, Array2};

use crate::baselines::{self, LASSO_DEFAULT_MAX_ITER, LASSO_DEFAULT_TOL};
use crate::error::{Error, Result};

/// Which contrast produced a W vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticKind {
    /// `W_j = |[A^T y]_j| − |[Ã^T y]_j|`.
    Marginal,
    /// Coefficient difference of a lasso fit on the augmented design.
    LassoDiff,
}

impl StatisticKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::Marginal => "marginal",
            StatisticKind::LassoDiff => "lasso-diff",
        }
    }
}

impl std::str::FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "marginal" => Ok(StatisticKind::Marginal),
            "lasso-diff" => Ok(StatisticKind::LassoDiff),
            other => Err(Error::Parse(format!(
                "unknown statistic '{other}' (expected marginal or lasso-diff)"
            ))),
        }
    }
}

/// Per-index knockoff statistics.
#[derive(Debug, Clone)]
pub struct WStatistics {
    pub w: Array1<f64>,
    pub statistic_kind: StatisticKind,
    /// λ of the augmented lasso fit; `None` for the marginal statistic.
    pub lasso_lambda: Option<f64>,
}

/// Numerator adjustment for the estimated-FDP ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjust {
    /// Ratio used verbatim.
    #[default]
    Identity,
    /// `(1 + #negatives) / #positives`: the offset variant whose selections
    /// control the plain (unmodified) FDR. Costs power on small supports,
    /// since nothing can be selected until at least `1/q` statistics clear
    /// the threshold.
    KnockoffPlus,
}

impl Adjust {
    pub fn name(&self) -> &'static str {
        match self {
            Adjust::Identity => "identity",
            Adjust::KnockoffPlus => "knockoff+",
        }
    }
}

/// Outcome of the threshold search.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Chosen threshold; `f64::INFINITY` when no candidate qualifies.
    pub threshold: f64,
    /// `{j : w_j >= threshold}`, empty when the threshold is infinite.
    pub support: Vec<usize>,
    pub q: f64,
    /// `(t, estimated FDP at t)` for every candidate threshold, ascending.
    pub fdp_curve: Vec<(f64, f64)>,
    pub adjust: Adjust,
}

/// Marginal correlation-difference statistic: `W_j = |[A^T y]_j| − |[Ã^T y]_j|`.
pub fn compute_w_marginal(a: &Array2<f64>, knockoff: &Array2<f64>, y: &Array1<f64>) -> WStatistics {
    let orig = a.t().dot(y);
    let ko = knockoff.t().dot(y);
    let w = Array1::from_iter(
        orig.iter()
            .zip(ko.iter())
            .map(|(o, k)| o.abs() - k.abs()),
    );
    WStatistics {
        w,
        statistic_kind: StatisticKind::Marginal,
        lasso_lambda: None,
    }
}

/// Lasso coefficient-difference statistic.
///
/// Fits the lasso at fixed `lambda` on the `m x 2n` augmented design
/// `[A Ã]` and sets `W_j = |b_j| − |b_{n+j}|`. The statistic is taken from
/// the returned coefficients without symmetrization, so when a column and
/// its knockoff are exact duplicates the cyclic coordinate order decides
/// which copy carries the weight (the original, being visited first).
/// A fit that exhausts its sweep budget is reported as an iteration-limit
/// error carrying the last iterate.
pub fn compute_w_lasso_diff(
    a: &Array2<f64>,
    knockoff: &Array2<f64>,
    y: &Array1<f64>,
    lambda: f64,
) -> Result<WStatistics> {
    if a.dim() != knockoff.dim() {
        return Err(Error::Parameter(format!(
            "original is {:?} but knockoff is {:?}",
            a.dim(),
            knockoff.dim()
        )));
    }
    let (m, n) = a.dim();
    let mut augmented = Array2::<f64>::zeros((m, 2 * n));
    augmented.slice_mut(ndarray::s![.., ..n]).assign(a);
    augmented.slice_mut(ndarray::s![.., n..]).assign(knockoff);
    let fit = baselines::lasso_coordinate_descent(
        &augmented,
        y,
        lambda,
        LASSO_DEFAULT_TOL,
        LASSO_DEFAULT_MAX_ITER,
    )?;
    if !fit.converged {
        return Err(Error::IterationLimit {
            iterations: fit.iterations,
            last_iterate: fit.coefficients.to_vec(),
        });
    }
    let b = fit.coefficients;
    let w = Array1::from_iter((0..n).map(|j| b[j].abs() - b[n + j].abs()));
    Ok(WStatistics {
        w,
        statistic_kind: StatisticKind::LassoDiff,
        lasso_lambda: Some(lambda),
    })
}

fn estimated_fdp(w: &Array1<f64>, t: f64, adjust: Adjust) -> f64 {
    let neg = w.iter().filter(|&&v| v <= -t).count();
    let pos = w.iter().filter(|&&v| v >= t).count();
    let numerator = match adjust {
        Adjust::Identity => neg as f64,
        Adjust::KnockoffPlus => 1.0 + neg as f64,
    };
    numerator / pos.max(1) as f64
}

/// Data-driven threshold.
///
/// Candidates are the distinct magnitudes `{|w_j| : w_j != 0}` in
/// ascending order (the estimated-FDP ratio is piecewise constant between
/// them). `T` is the smallest candidate whose ratio is at most `q`; when
/// none qualifies the threshold is `+inf` and the support empty. The full
/// `(t, ratio)` curve over the candidates is returned alongside.
pub fn compute_threshold(stats: &WStatistics, q: f64, adjust: Adjust) -> Result<SelectionResult> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::Parameter(format!("q = {q} outside (0, 1)")));
    }
    let mut candidates: Vec<f64> = stats
        .w
        .iter()
        .filter(|&&v| v != 0.0)
        .map(|v| v.abs())
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut threshold = f64::INFINITY;
    let mut fdp_curve = Vec::with_capacity(candidates.len());
    for &t in &candidates {
        let ratio = estimated_fdp(&stats.w, t, adjust);
        fdp_curve.push((t, ratio));
        if threshold.is_infinite() && ratio <= q {
            threshold = t;
        }
    }
    let support = select_support(stats, threshold);
    Ok(SelectionResult {
        threshold,
        support,
        q,
        fdp_curve,
        adjust,
    })
}

/// `{j : w_j >= threshold}`; ties at exactly the threshold are included.
pub fn select_support(stats: &WStatistics, threshold: f64) -> Vec<usize> {
    if threshold.is_infinite() {
        return Vec::new();
    }
    stats
        .w
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= threshold)
        .map(|(j, _)| j)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knockoff::construct_knockoff_gaussian;
    use crate::model::{
        generate_block_correlated_matrix, generate_sparse_signal, synthesize_observation, trial_rng,
        SnrDb,
    };
    use ndarray::array;
    use rand::Rng;

    fn stats(w: Vec<f64>) -> WStatistics {
        WStatistics {
            w: Array1::from_vec(w),
            statistic_kind: StatisticKind::Marginal,
            lasso_lambda: None,
        }
    }

    /// Brute-force threshold oracle: evaluate the ratio at every positive
    /// candidate magnitude directly.
    fn brute_force_threshold(w: &[f64], q: f64, adjust: Adjust) -> f64 {
        let mut cands: Vec<f64> = w.iter().filter(|&&v| v != 0.0).map(|v| v.abs()).collect();
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        for t in cands {
            let neg = w.iter().filter(|&&v| v <= -t).count() as f64;
            let pos = w.iter().filter(|&&v| v >= t).count().max(1) as f64;
            let num = match adjust {
                Adjust::Identity => neg,
                Adjust::KnockoffPlus => neg + 1.0,
            };
            if num / pos <= q {
                return t;
            }
        }
        f64::INFINITY
    }

    #[test]
    fn marginal_w_zero_for_identical_knockoff() {
        let mut rng = trial_rng(60, 0);
        let a = generate_block_correlated_matrix(8, 5, 5, 0.6, &mut rng).unwrap();
        let y = Array1::from_iter((0..8).map(|i| (i as f64).sin()));
        let w = compute_w_marginal(&a.entries, &a.entries.clone(), &y);
        assert!(w.w.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn marginal_w_direct_evaluation() {
        // A = I2, Ã = 0, y = (3, -1) -> w = (3, 1)
        let a = Array2::<f64>::eye(2);
        let ko = Array2::<f64>::zeros((2, 2));
        let y = array![3.0, -1.0];
        let w = compute_w_marginal(&a, &ko, &y);
        assert_eq!(w.w[0], 3.0);
        assert_eq!(w.w[1], 1.0);
    }

    #[test]
    fn marginal_w_matches_naive_loop_oracle() {
        let mut rng = trial_rng(61, 0);
        let a = generate_block_correlated_matrix(5, 8, 5, 0.6, &mut rng).unwrap();
        let ko = generate_block_correlated_matrix(5, 8, 5, 0.6, &mut rng).unwrap();
        let y = Array1::from_iter((0..5).map(|_| rng.random::<f64>() - 0.5));
        let w = compute_w_marginal(&a.entries, &ko.entries, &y);
        for j in 0..8 {
            let mut o = 0.0;
            let mut k = 0.0;
            for i in 0..5 {
                o += a.entries[[i, j]] * y[i];
                k += ko.entries[[i, j]] * y[i];
            }
            assert!((w.w[j] - (o.abs() - k.abs())).abs() < 1e-12);
        }
    }

    #[test]
    fn lasso_diff_zero_response_gives_zero_w() {
        let mut rng = trial_rng(62, 0);
        let a = generate_block_correlated_matrix(6, 4, 5, 0.6, &mut rng).unwrap();
        let ko = generate_block_correlated_matrix(6, 4, 5, 0.6, &mut rng).unwrap();
        let y = Array1::zeros(6);
        let w = compute_w_lasso_diff(&a.entries, &ko.entries, &y, 0.1).unwrap();
        assert!(w.w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lasso_diff_duplicate_columns_favor_originals() {
        // Ã = A: cyclic order gives the weight to the first copy, so
        // W_j = |b_j| >= 0 with no symmetrization
        let mut rng = trial_rng(63, 0);
        let sig = generate_sparse_signal(4, 2, &mut rng).unwrap();
        let a = generate_block_correlated_matrix(10, 4, 2, 0.3, &mut rng).unwrap();
        let y = a.entries.dot(&sig.values);
        let w = compute_w_lasso_diff(&a.entries, &a.entries.clone(), &y, 1e-3).unwrap();
        assert!(w.w.iter().all(|&v| v >= -1e-12));
        assert!(w.w.iter().any(|&v| v > 1e-6));
    }

    #[test]
    fn lasso_diff_matches_augmented_oracle() {
        // exhaustive active-set oracle on the augmented design (n=2 -> 4
        // augmented columns is already 81 sign patterns; keep it small)
        let mut rng = trial_rng(64, 0);
        let a = generate_block_correlated_matrix(10, 2, 2, 0.4, &mut rng).unwrap();
        let ko = generate_block_correlated_matrix(10, 2, 2, 0.4, &mut rng).unwrap();
        let sig = generate_sparse_signal(2, 1, &mut rng).unwrap();
        let y = a.entries.dot(&sig.values);
        let lambda = 0.02;
        let w = compute_w_lasso_diff(&a.entries, &ko.entries, &y, lambda).unwrap();

        let mut augmented = Array2::<f64>::zeros((10, 4));
        augmented.slice_mut(ndarray::s![.., ..2]).assign(&a.entries);
        augmented.slice_mut(ndarray::s![.., 2..]).assign(&ko.entries);
        let m_f = 10.0;
        let mut best: Option<(f64, Vec<f64>)> = None;
        for code in 0..81usize {
            let mut signs = [0i8; 4];
            let mut c = code;
            for s in signs.iter_mut() {
                *s = [0i8, 1, -1][c % 3];
                c /= 3;
            }
            let active: Vec<usize> = (0..4).filter(|&j| signs[j] != 0).collect();
            let mut b = vec![0.0; 4];
            if !active.is_empty() {
                let k = active.len();
                let mut gram = Array2::<f64>::zeros((k, k));
                let mut rhs = Array1::<f64>::zeros(k);
                for (p, &jp) in active.iter().enumerate() {
                    for (q, &jq) in active.iter().enumerate() {
                        gram[[p, q]] = augmented.column(jp).dot(&augmented.column(jq)) / m_f;
                    }
                    rhs[p] = augmented.column(jp).dot(&y) / m_f - lambda * signs[jp] as f64;
                }
                let sol = match crate::linalg::solve_spd(&gram, &rhs) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                if active
                    .iter()
                    .enumerate()
                    .any(|(p, &jp)| sol[p] * signs[jp] as f64 <= 0.0)
                {
                    continue;
                }
                for (p, &jp) in active.iter().enumerate() {
                    b[jp] = sol[p];
                }
            }
            let bv = Array1::from_vec(b.clone());
            let r = &y - &augmented.dot(&bv);
            if (0..4).any(|j| {
                signs[j] == 0 && augmented.column(j).dot(&r).abs() / m_f > lambda * (1.0 + 1e-9)
            }) {
                continue;
            }
            let obj = crate::baselines::lasso_objective(&augmented, &y, &bv, lambda);
            if best.as_ref().map_or(true, |(bo, _)| obj < *bo) {
                best = Some((obj, b));
            }
        }
        let oracle = best.expect("oracle found no optimum").1;
        for j in 0..2 {
            let want = oracle[j].abs() - oracle[2 + j].abs();
            assert!(
                (w.w[j] - want).abs() < 1e-6,
                "w[{j}] = {} vs oracle {want}",
                w.w[j]
            );
        }
    }

    #[test]
    fn threshold_worked_example() {
        // ratios at t=0.5: 2/3; t=1: 2/2; t=2: 1/2; t=3: 0/1
        let s = stats(vec![3.0, 2.0, -1.0, 0.5, -2.0]);
        let sel = compute_threshold(&s, 0.5, Adjust::Identity).unwrap();
        assert_eq!(sel.threshold, 2.0);
        assert_eq!(sel.support, vec![0, 1]);
        // the curve records every distinct candidate magnitude
        assert_eq!(sel.fdp_curve.len(), 4);
        assert_eq!(sel.fdp_curve[0], (0.5, 2.0 / 3.0));
        assert_eq!(sel.fdp_curve[1], (1.0, 1.0));
        assert_eq!(sel.fdp_curve[2], (2.0, 0.5));
        assert_eq!(sel.fdp_curve[3], (3.0, 0.0));
    }

    #[test]
    fn threshold_all_positive_w() {
        let s = stats(vec![0.3, 1.2, 0.7]);
        let sel = compute_threshold(&s, 0.1, Adjust::Identity).unwrap();
        assert_eq!(sel.threshold, 0.3);
        assert_eq!(sel.support, vec![0, 1, 2]);
    }

    #[test]
    fn threshold_all_negative_w_is_infinite() {
        let s = stats(vec![-0.3, -1.2, -0.7]);
        let sel = compute_threshold(&s, 0.5, Adjust::Identity).unwrap();
        assert!(sel.threshold.is_infinite());
        assert!(sel.support.is_empty());
    }

    #[test]
    fn threshold_all_zero_w_is_infinite() {
        let s = stats(vec![0.0, 0.0]);
        let sel = compute_threshold(&s, 0.5, Adjust::Identity).unwrap();
        assert!(sel.threshold.is_infinite());
        assert!(sel.support.is_empty());
        assert!(sel.fdp_curve.is_empty());
    }

    #[test]
    fn threshold_rejects_bad_q() {
        let s = stats(vec![1.0]);
        assert!(compute_threshold(&s, 0.0, Adjust::Identity).is_err());
        assert!(compute_threshold(&s, 1.0, Adjust::Identity).is_err());
    }

    #[test]
    fn select_support_edge_cases() {
        let s = stats(vec![3.0, 2.0, -1.0, 0.5, -2.0]);
        assert!(select_support(&s, f64::INFINITY).is_empty());
        assert_eq!(select_support(&s, 2.0), vec![0, 1]);
        // all at or above the threshold
        assert_eq!(select_support(&s, -2.0), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn threshold_matches_brute_force_on_random_vectors() {
        let mut rng = trial_rng(70, 0);
        for trial in 0..500 {
            let n = 1 + (rng.random::<u32>() as usize) % 20;
            let w: Vec<f64> = (0..n)
                .map(|_| {
                    // mix of signs, magnitudes, zeros and exact ties
                    let v: f64 = rng.random::<f64>() * 4.0 - 2.0;
                    if v.abs() < 0.2 {
                        0.0
                    } else {
                        (v * 4.0).round() / 4.0
                    }
                })
                .collect();
            for &q in &[0.05, 0.1, 0.25, 0.5] {
                for &adj in &[Adjust::Identity, Adjust::KnockoffPlus] {
                    let got = compute_threshold(&stats(w.clone()), q, adj).unwrap();
                    let want = brute_force_threshold(&w, q, adj);
                    assert_eq!(
                        got.threshold.to_bits(),
                        want.to_bits(),
                        "trial {trial}: w = {w:?}, q = {q}, adjust = {adj:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn threshold_monotone_in_q() {
        let mut rng = trial_rng(71, 0);
        for _ in 0..100 {
            let w: Vec<f64> = (0..15).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let s = stats(w);
            let lo = compute_threshold(&s, 0.1, Adjust::Identity).unwrap();
            let hi = compute_threshold(&s, 0.4, Adjust::Identity).unwrap();
            assert!(lo.threshold >= hi.threshold);
            for j in &lo.support {
                assert!(hi.support.contains(j), "S(q1) not nested in S(q2)");
            }
        }
    }

    #[test]
    fn selection_scale_equivariance() {
        // scaling y by c > 0 scales marginal w by c and leaves the
        // selection unchanged
        let mut rng = trial_rng(72, 0);
        let sig = generate_sparse_signal(30, 3, &mut rng).unwrap();
        let a = generate_block_correlated_matrix(20, 30, 5, 0.6, &mut rng).unwrap();
        let obs = synthesize_observation(&a, &sig, SnrDb::Db(20.0), &mut rng).unwrap();
        let pair = construct_knockoff_gaussian(&a, 0.5, &mut rng).unwrap();
        let w1 = compute_w_marginal(&a.entries, &pair.knockoff, &obs.y);
        let scaled = &obs.y * 7.5;
        let w2 = compute_w_marginal(&a.entries, &pair.knockoff, &scaled);
        for j in 0..30 {
            assert!((w2.w[j] - 7.5 * w1.w[j]).abs() < 1e-10);
        }
        let s1 = compute_threshold(&w1, 0.2, Adjust::Identity).unwrap();
        let s2 = compute_threshold(&w2, 0.2, Adjust::Identity).unwrap();
        assert_eq!(s1.support, s2.support);
    }

    #[test]
    fn antisymmetry_swapping_column_flips_w_sign() {
        // exchanging column j between A and Ã flips w_j for both kinds
        let mut rng = trial_rng(73, 0);
        let sig = generate_sparse_signal(6, 2, &mut rng).unwrap();
        let a = generate_block_correlated_matrix(12, 6, 3, 0.4, &mut rng).unwrap();
        let obs = synthesize_observation(&a, &sig, SnrDb::Db(30.0), &mut rng).unwrap();
        let pair = construct_knockoff_gaussian(&a, 0.5, &mut rng).unwrap();

        let j_swap = 1;
        let mut a_sw = a.entries.clone();
        let mut k_sw = pair.knockoff.clone();
        let tmp = a_sw.column(j_swap).to_owned();
        a_sw.column_mut(j_swap).assign(&pair.knockoff.column(j_swap));
        k_sw.column_mut(j_swap).assign(&tmp);

        let w = compute_w_marginal(&a.entries, &pair.knockoff, &obs.y);
        let w_sw = compute_w_marginal(&a_sw, &k_sw, &obs.y);
        assert!((w.w[j_swap] + w_sw.w[j_swap]).abs() < 1e-12);

        let wl = compute_w_lasso_diff(&a.entries, &pair.knockoff, &obs.y, 0.005).unwrap();
        let wl_sw = compute_w_lasso_diff(&a_sw, &k_sw, &obs.y, 0.005).unwrap();
        assert!(
            (wl.w[j_swap] + wl_sw.w[j_swap]).abs() < 1e-5,
            "lasso-diff antisymmetry: {} vs {}",
            wl.w[j_swap],
            wl_sw.w[j_swap]
        );
    }
}
