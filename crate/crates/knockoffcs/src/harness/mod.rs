//! Config-driven experiment runner.
//!
//! A sweep runs the Cartesian product of the configured dimension,
//! measurement, sparsity and SNR lists; every (cell, trial) generates one
//! problem instance that all three methods consume unchanged. Trials can
//! run concurrently; records are buffered and emitted in deterministic
//! (cell, trial, method) order regardless of completion order, so a
//! sweep's CSV output is a pure function of (config, seed).

pub mod config;
mod plots;
mod report;

pub use config::{OmpK, StrategyChoice, SweepConfig};
pub use plots::emit_plots;
pub use report::{results_csv, summary_csv, write_outputs};

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use std::time::Instant;

use crate::baselines::{self, LASSO_DEFAULT_MAX_ITER, LASSO_DEFAULT_TOL, LASSO_SUPPORT_EPS};
use crate::error::{Error, Result};
use crate::estimate::{self, Solver};
use crate::filter::{self, Adjust, StatisticKind};
use crate::knockoff::{self, KnockoffStrategy};
use crate::metrics::{self, Method, TrialMetrics};
use crate::model::{InstanceParams, MeasurementMatrix, ProblemInstance, SnrDb};

/// One sweep-grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub snr_db: SnrDb,
}

/// Evaluation record for one (cell, trial, method).
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub cell: CellParams,
    pub trial: u64,
    pub method: Method,
    /// `None` when the method failed on this instance.
    pub metrics: Option<TrialMetrics>,
    /// `"ok"` or `"error:<class>"`.
    pub status: String,
}

/// Per-(cell, method) aggregate of a metric: mean and standard error.
#[derive(Debug, Clone, Copy)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    if n == 0 {
        return MeanSe {
            mean: f64::NAN,
            se: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MeanSe { mean, se: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    MeanSe {
        mean,
        se: (var / n as f64).sqrt(),
    }
}

/// Aggregated metrics for one (cell, method).
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub cell: CellParams,
    pub method: Method,
    pub n_ok: usize,
    pub fdp: MeanSe,
    pub power: MeanSe,
    pub f1: MeanSe,
    pub relative_error: MeanSe,
    pub measurement_error: MeanSe,
    pub support_size_mean: f64,
    pub runtime_ms_mean: f64,
}

/// Everything a sweep produces.
pub struct SweepResult {
    pub config: SweepConfig,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    /// Human-readable descriptions of per-method failures.
    pub failures: Vec<String>,
}

/// λ for the lasso-diff statistic: `frac` times the augmented design's
/// λ_max (the smallest λ whose fit is identically zero under the
/// `(1/(2m))` objective scaling).
pub fn statistic_lambda(
    a: &Array2<f64>,
    knockoff: &Array2<f64>,
    y: &Array1<f64>,
    frac: f64,
) -> f64 {
    let m = a.nrows() as f64;
    let max_orig = a.t().dot(y).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let max_ko = knockoff
        .t()
        .dot(y)
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    frac * max_orig.max(max_ko) / m
}

fn evaluate(
    instance: &ProblemInstance,
    method: Method,
    support: &[usize],
    x_hat: &Array1<f64>,
    runtime_ms: f64,
) -> Result<TrialMetrics> {
    Ok(TrialMetrics {
        fdp: metrics::fdp(support, &instance.signal.support),
        power: metrics::power_tpr(support, &instance.signal.support)?,
        f1: metrics::f1(support, &instance.signal.support),
        relative_error: metrics::relative_error(x_hat, &instance.signal.values)?,
        measurement_error: metrics::measurement_error(
            &instance.matrix.entries,
            x_hat,
            &instance.obs.y,
        ),
        support_size: support.len(),
        method,
        runtime_ms,
    })
}

/// The knockoff-guided pipeline on one instance: construct, filter,
/// restricted least squares. Returns the support and full-length estimate.
pub fn knockoffcs_pipeline<R: rand::Rng>(
    matrix: &MeasurementMatrix,
    y: &Array1<f64>,
    strategy: KnockoffStrategy,
    statistic: StatisticKind,
    statistic_lambda_frac: f64,
    q: f64,
    adjust: Adjust,
    rng: &mut R,
) -> Result<(Vec<usize>, Array1<f64>)> {
    let pair = match strategy {
        KnockoffStrategy::PaperFixed => knockoff::construct_knockoff_paper_fixed(matrix)?,
        KnockoffStrategy::GaussianEquicorrelated { shrinkage_eps } => {
            knockoff::construct_knockoff_gaussian(matrix, shrinkage_eps, rng)?
        }
    };
    let stats = match statistic {
        StatisticKind::Marginal => filter::compute_w_marginal(&matrix.entries, &pair.knockoff, y),
        StatisticKind::LassoDiff => {
            let lambda = statistic_lambda(&matrix.entries, &pair.knockoff, y, statistic_lambda_frac);
            filter::compute_w_lasso_diff(&matrix.entries, &pair.knockoff, y, lambda)?
        }
    };
    let selection = filter::compute_threshold(&stats, q, adjust)?;
    let recovered =
        estimate::least_squares_on_support(&matrix.entries, y, &selection.support, 0.0, Solver::Direct)?;
    Ok((recovered.support, recovered.x_hat))
}

/// Run all three methods on one freshly generated instance.
pub fn run_trial(config: &SweepConfig, cell: &CellParams, trial: u64) -> Vec<RunRecord> {
    let params = InstanceParams {
        n: cell.n,
        m: cell.m,
        s: cell.s,
        snr_db: cell.snr_db,
        block_size: config.block_size,
        rho: config.rho,
    };
    let mut rng = crate::model::trial_rng(config.seed, trial);
    let instance = match ProblemInstance::generate_with_rng(&params, config.seed, trial, &mut rng) {
        Ok(inst) => inst,
        Err(e) => {
            // nothing to evaluate; every method reports the same failure
            return Method::ALL
                .iter()
                .map(|&method| RunRecord {
                    cell: *cell,
                    trial,
                    method,
                    metrics: None,
                    status: format!("error:{:?}", e.class()).to_lowercase(),
                })
                .collect();
        }
    };

    let mut records = Vec::with_capacity(3);
    for &method in Method::ALL.iter() {
        let start = Instant::now();
        let outcome: Result<(Vec<usize>, Array1<f64>)> = match method {
            Method::KnockoffCs => knockoffcs_pipeline(
                &instance.matrix,
                &instance.obs.y,
                config.knockoff_strategy.to_strategy(),
                config.statistic,
                config.statistic_lambda_frac,
                config.q,
                Adjust::Identity,
                &mut rng,
            ),
            Method::Lasso => baselines::lasso_coordinate_descent(
                &instance.matrix.entries,
                &instance.obs.y,
                config.lasso_lambda,
                LASSO_DEFAULT_TOL,
                LASSO_DEFAULT_MAX_ITER,
            )
            .map(|fit| {
                let support = baselines::lasso_support(&fit, LASSO_SUPPORT_EPS);
                (support, fit.coefficients)
            }),
            Method::Omp => {
                let k = match config.omp_k {
                    OmpK::Oracle => cell.s,
                    OmpK::Fixed(k) => k,
                }
                .min(cell.m.min(cell.n));
                baselines::omp(&instance.matrix.entries, &instance.obs.y, k).map(|fit| {
                    let mut support = fit.support.clone();
                    support.sort_unstable();
                    (support, fit.coefficients)
                })
            }
        };
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        let record = match outcome.and_then(|(support, x_hat)| {
            evaluate(&instance, method, &support, &x_hat, runtime_ms)
        }) {
            Ok(metrics) => RunRecord {
                cell: *cell,
                trial,
                method,
                metrics: Some(metrics),
                status: "ok".to_string(),
            },
            Err(e) => RunRecord {
                cell: *cell,
                trial,
                method,
                metrics: None,
                status: format!("error:{:?}", e.class()).to_lowercase(),
            },
        };
        records.push(record);
    }
    records
}

fn summarize(cells: &[CellParams], records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for cell in cells {
        for &method in Method::ALL.iter() {
            let ok: Vec<&TrialMetrics> = records
                .iter()
                .filter(|r| r.cell == *cell && r.method == method)
                .filter_map(|r| r.metrics.as_ref())
                .collect();
            let pick = |f: fn(&TrialMetrics) -> f64| -> Vec<f64> { ok.iter().map(|m| f(m)).collect() };
            let support_sizes: Vec<f64> = ok.iter().map(|m| m.support_size as f64).collect();
            let runtimes: Vec<f64> = ok.iter().map(|m| m.runtime_ms).collect();
            rows.push(SummaryRow {
                cell: *cell,
                method,
                n_ok: ok.len(),
                fdp: mean_se(&pick(|m| m.fdp)),
                power: mean_se(&pick(|m| m.power)),
                f1: mean_se(&pick(|m| m.f1)),
                relative_error: mean_se(&pick(|m| m.relative_error)),
                measurement_error: mean_se(&pick(|m| m.measurement_error)),
                support_size_mean: mean_se(&support_sizes).mean,
                runtime_ms_mean: mean_se(&runtimes).mean,
            });
        }
    }
    rows
}

/// The sweep grid in deterministic nested order (n, m, s, snr).
pub fn cells(config: &SweepConfig) -> Vec<CellParams> {
    let mut out = Vec::new();
    for &n in &config.n_list {
        for &m in &config.m_list {
            for &s in &config.s_list {
                for &snr_db in &config.snr_db_list {
                    out.push(CellParams { n, m, s, snr_db });
                }
            }
        }
    }
    out
}

/// Run the full sweep, optionally on a dedicated thread pool.
pub fn run_sweep(config: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    config.validate()?;
    let grid = cells(config);
    let work: Vec<(CellParams, u64)> = grid
        .iter()
        .flat_map(|cell| (0..config.trials).map(move |t| (*cell, t)))
        .collect();

    let run_all = || -> Vec<Vec<RunRecord>> {
        work.par_iter()
            .map(|(cell, trial)| run_trial(config, cell, *trial))
            .collect()
    };
    let nested: Vec<Vec<RunRecord>> = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
            pool.install(run_all)
        }
        None => run_all(),
    };
    let records: Vec<RunRecord> = nested.into_iter().flatten().collect();
    let failures: Vec<String> = records
        .iter()
        .filter(|r| r.status != "ok")
        .map(|r| {
            format!(
                "n={} m={} s={} snr={} trial={} method={}: {}",
                r.cell.n, r.cell.m, r.cell.s, r.cell.snr_db, r.trial, r.method.name(), r.status
            )
        })
        .collect();
    let summary = summarize(&grid, &records);
    Ok(SweepResult {
        config: config.clone(),
        records,
        summary,
        failures,
    })
}

/// How `recover` should pick its support and estimate.
#[derive(Debug, Clone)]
pub struct RecoverOptions {
    pub method: Method,
    /// Explicit support (skips selection entirely) when given.
    pub support: Option<Vec<usize>>,
    pub q: f64,
    pub lasso_lambda: f64,
    pub omp_k: Option<usize>,
    pub statistic: StatisticKind,
    /// Fixed λ for the lasso-diff statistic; derived from
    /// `statistic_lambda_frac` when absent.
    pub statistic_lambda: Option<f64>,
    pub statistic_lambda_frac: f64,
    pub strategy: StrategyChoice,
    pub shrinkage_eps: Option<f64>,
    pub ridge_lambda: f64,
    pub solver: Solver,
    pub seed: u64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        let cfg = SweepConfig::default();
        RecoverOptions {
            method: Method::KnockoffCs,
            support: None,
            q: cfg.q,
            lasso_lambda: cfg.lasso_lambda,
            omp_k: None,
            statistic: cfg.statistic,
            statistic_lambda: None,
            statistic_lambda_frac: cfg.statistic_lambda_frac,
            strategy: cfg.knockoff_strategy,
            shrinkage_eps: None,
            ridge_lambda: 0.0,
            solver: Solver::Direct,
            seed: cfg.seed,
        }
    }
}

/// One-shot recovery used by the CLI: read A and y, produce x̂.
pub fn run_recovery(
    a: &Array2<f64>,
    y: &Array1<f64>,
    opts: &RecoverOptions,
) -> Result<(Array1<f64>, Vec<usize>)> {
    let (m, _n) = a.dim();
    if y.len() != m {
        return Err(Error::Parameter(format!(
            "matrix has {m} rows but y has length {}",
            y.len()
        )));
    }
    if let Some(support) = &opts.support {
        let rec =
            estimate::least_squares_on_support(a, y, support, opts.ridge_lambda, opts.solver)?;
        return Ok((rec.x_hat, rec.support));
    }
    match opts.method {
        Method::KnockoffCs => {
            let matrix = MeasurementMatrix::from_entries(a.clone());
            let strategy = match (opts.strategy, opts.shrinkage_eps) {
                (StrategyChoice::PaperFixed, _) => KnockoffStrategy::PaperFixed,
                (StrategyChoice::Gaussian, Some(eps)) => {
                    KnockoffStrategy::GaussianEquicorrelated { shrinkage_eps: eps }
                }
                (StrategyChoice::Gaussian, None) => StrategyChoice::Gaussian.to_strategy(),
            };
            let mut rng = crate::model::trial_rng(opts.seed, 0);
            let pair = match strategy {
                KnockoffStrategy::PaperFixed => knockoff::construct_knockoff_paper_fixed(&matrix)?,
                KnockoffStrategy::GaussianEquicorrelated { shrinkage_eps } => {
                    knockoff::construct_knockoff_gaussian(&matrix, shrinkage_eps, &mut rng)?
                }
            };
            let stats = match opts.statistic {
                StatisticKind::Marginal => filter::compute_w_marginal(a, &pair.knockoff, y),
                StatisticKind::LassoDiff => {
                    let lambda = opts.statistic_lambda.unwrap_or_else(|| {
                        statistic_lambda(a, &pair.knockoff, y, opts.statistic_lambda_frac)
                    });
                    filter::compute_w_lasso_diff(a, &pair.knockoff, y, lambda)?
                }
            };
            let selection = filter::compute_threshold(&stats, opts.q, Adjust::Identity)?;
            let rec = estimate::least_squares_on_support(
                a,
                y,
                &selection.support,
                opts.ridge_lambda,
                opts.solver,
            )?;
            Ok((rec.x_hat, rec.support))
        }
        Method::Lasso => {
            let fit = baselines::lasso_coordinate_descent(
                a,
                y,
                opts.lasso_lambda,
                LASSO_DEFAULT_TOL,
                LASSO_DEFAULT_MAX_ITER,
            )?;
            let support = baselines::lasso_support(&fit, LASSO_SUPPORT_EPS);
            Ok((fit.coefficients, support))
        }
        Method::Omp => {
            let k = opts.omp_k.unwrap_or_else(|| (m / 4).max(1));
            let fit = baselines::omp(a, y, k)?;
            let mut support = fit.support.clone();
            support.sort_unstable();
            Ok((fit.coefficients, support))
        }
    }
}
