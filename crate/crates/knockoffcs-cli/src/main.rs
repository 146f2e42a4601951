//! Command-line interface for knockoff-guided compressive sensing.
//!
//! Subcommands: `simulate` (config-driven sweep with CSV and SVG output),
//! `recover` (single-instance signal recovery), `knockoff-check` (Gram
//! diagnostics for a constructed knockoff), `select` (W statistics,
//! threshold and support only). Exit codes: 0 success, 2 parameter error,
//! 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::time::Instant;

use knockoffcs::error::{Error, Result};
use knockoffcs::estimate::Solver;
use knockoffcs::filter::{self, Adjust, StatisticKind};
use knockoffcs::harness::{self, RecoverOptions, StrategyChoice, SweepConfig};
use knockoffcs::knockoff::{self, DEFAULT_SHRINKAGE_EPS};
use knockoffcs::metrics::Method;
use knockoffcs::model::MeasurementMatrix;
use knockoffcs::{io as kio};

#[derive(Parser)]
#[command(
    name = "knockoffcs",
    about = "FDR-controlled sparse signal recovery from compressed measurements",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the config-driven simulation sweep.
    Simulate(SimulateArgs),
    /// Recover a signal from A and y with one method.
    Recover(RecoverArgs),
    /// Construct a knockoff for A and print its Gram diagnostics.
    KnockoffCheck(KnockoffCheckArgs),
    /// Compute W statistics, the threshold and the selected support.
    Select(SelectArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Sweep configuration file (flat key = value format).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for results.csv, summary.csv and plots.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Measurement matrix CSV (m rows, n columns).
    #[arg(long)]
    matrix: PathBuf,
    /// Observation vector CSV (m values).
    #[arg(long)]
    obs: PathBuf,
    /// Output CSV for the recovered signal (one column of n values).
    #[arg(long)]
    out: PathBuf,
    /// Recovery method.
    #[arg(long, default_value = "knockoffcs")]
    method: String,
    /// Explicit support (comma-separated 0-based indices); skips selection.
    #[arg(long)]
    support: Option<String>,
    /// Target FDR level for knockoffcs.
    #[arg(long, default_value_t = 0.1)]
    q: f64,
    /// LASSO regularization (baseline method), or the fixed lasso-diff
    /// statistic λ when --method knockoffcs --statistic lasso-diff.
    #[arg(long)]
    lambda: Option<f64>,
    /// OMP sparsity budget (defaults to m/4).
    #[arg(long)]
    k: Option<usize>,
    /// W statistic for knockoffcs.
    #[arg(long, default_value = "lasso-diff")]
    statistic: String,
    /// Knockoff construction.
    #[arg(long, default_value = "gaussian")]
    strategy: String,
    /// Covariance shrinkage for gaussian knockoffs.
    #[arg(long)]
    eps: Option<f64>,
    /// Ridge added to the restricted least-squares solve.
    #[arg(long, default_value_t = 0.0)]
    ridge_lambda: f64,
    /// Normal-equation solver: direct or cg.
    #[arg(long, default_value = "direct")]
    solver: String,
    /// Seed for knockoff sampling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct KnockoffCheckArgs {
    /// Measurement matrix CSV.
    #[arg(long)]
    matrix: PathBuf,
    /// Construction: paper-fixed or gaussian.
    #[arg(long, default_value = "gaussian")]
    strategy: String,
    /// Covariance shrinkage for the gaussian construction.
    #[arg(long, default_value_t = DEFAULT_SHRINKAGE_EPS)]
    eps: f64,
    /// Seed for knockoff sampling.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct SelectArgs {
    /// Measurement matrix CSV.
    #[arg(long)]
    matrix: PathBuf,
    /// Knockoff matrix CSV (same shape as the matrix).
    #[arg(long)]
    knockoff: PathBuf,
    /// Observation vector CSV.
    #[arg(long)]
    obs: PathBuf,
    /// Target FDR level.
    #[arg(long, default_value_t = 0.1)]
    q: f64,
    /// W statistic: marginal or lasso-diff.
    #[arg(long, default_value = "marginal")]
    statistic: String,
    /// Fixed λ for the lasso-diff statistic (scale-derived default).
    #[arg(long)]
    lambda: Option<f64>,
}

fn parse_support(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid support index '{}'", tok.trim())))
        })
        .collect()
}

fn parse_solver(text: &str) -> Result<Solver> {
    match text {
        "direct" => Ok(Solver::Direct),
        "cg" => Ok(Solver::Cg),
        other => Err(Error::Parse(format!(
            "unknown solver '{other}' (expected direct or cg)"
        ))),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::from_file(path)?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let started = Instant::now();
    let result = harness::run_sweep(&config, args.threads)?;
    let written = harness::write_outputs(&result, &args.out)?;
    for failure in &result.failures {
        eprintln!("warning: {failure}");
    }
    let total_runtime_ms: f64 = result
        .records
        .iter()
        .filter_map(|r| r.metrics.as_ref())
        .map(|m| m.runtime_ms)
        .sum();
    eprintln!(
        "{} records ({} failures) in {:.1}s wall, {:.0}ms summed method time; {} files in {}",
        result.records.len(),
        result.failures.len(),
        started.elapsed().as_secs_f64(),
        total_runtime_ms,
        written.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_recover(args: RecoverArgs) -> Result<()> {
    let a = kio::read_matrix(&args.matrix)?;
    let y = kio::read_vector(&args.obs)?;
    let method: Method = args.method.parse()?;
    let defaults = RecoverOptions::default();
    let opts = RecoverOptions {
        method,
        support: args.support.as_deref().map(parse_support).transpose()?,
        q: args.q,
        lasso_lambda: match (method, args.lambda) {
            (Method::Lasso, Some(l)) => l,
            _ => defaults.lasso_lambda,
        },
        omp_k: args.k,
        statistic: args.statistic.parse()?,
        statistic_lambda: match method {
            Method::KnockoffCs => args.lambda,
            _ => None,
        },
        strategy: args.strategy.parse()?,
        shrinkage_eps: args.eps,
        ridge_lambda: args.ridge_lambda,
        solver: parse_solver(&args.solver)?,
        seed: args.seed,
        ..defaults
    };
    let (x_hat, support) = harness::run_recovery(&a, &y, &opts)?;
    kio::write_vector(&args.out, &x_hat)?;
    let support_str: Vec<String> = support.iter().map(|j| j.to_string()).collect();
    println!("support,{}", support_str.join(","));
    eprintln!(
        "recovered {} of {} coordinates -> {}",
        support.len(),
        x_hat.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_knockoff_check(args: KnockoffCheckArgs) -> Result<()> {
    let entries = kio::read_matrix(&args.matrix)?;
    let matrix = MeasurementMatrix::from_entries(entries);
    let strategy: StrategyChoice = args.strategy.parse()?;
    let pair = match strategy {
        StrategyChoice::PaperFixed => knockoff::construct_knockoff_paper_fixed(&matrix)?,
        StrategyChoice::Gaussian => {
            let mut rng = knockoffcs::model::trial_rng(args.seed, 0);
            knockoff::construct_knockoff_gaussian(&matrix, args.eps, &mut rng)?
        }
    };
    let report = knockoff::validate_knockoff(&pair);
    println!("strategy,s,dev_self,dev_cross");
    println!(
        "{},{},{},{}",
        pair.strategy.name(),
        kio::format_f64(pair.s_vector[0]),
        kio::format_f64(report.dev_self),
        kio::format_f64(report.dev_cross)
    );
    Ok(())
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let a = kio::read_matrix(&args.matrix)?;
    let ko = kio::read_matrix(&args.knockoff)?;
    let y = kio::read_vector(&args.obs)?;
    if a.dim() != ko.dim() {
        return Err(Error::Parameter(format!(
            "matrix is {:?} but knockoff is {:?}",
            a.dim(),
            ko.dim()
        )));
    }
    let statistic: StatisticKind = args.statistic.parse()?;
    let stats = match statistic {
        StatisticKind::Marginal => filter::compute_w_marginal(&a, &ko, &y),
        StatisticKind::LassoDiff => {
            let defaults = SweepConfig::default();
            let lambda = args.lambda.unwrap_or_else(|| {
                harness::statistic_lambda(&a, &ko, &y, defaults.statistic_lambda_frac)
            });
            filter::compute_w_lasso_diff(&a, &ko, &y, lambda)?
        }
    };
    let selection = filter::compute_threshold(&stats, args.q, Adjust::Identity)?;
    let threshold = if selection.threshold.is_finite() {
        kio::format_f64(selection.threshold)
    } else {
        "inf".to_string()
    };
    println!("threshold,{threshold}");
    let support_str: Vec<String> = selection.support.iter().map(|j| j.to_string()).collect();
    println!("support,{}", support_str.join(","));
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Recover(args) => cmd_recover(args),
        Command::KnockoffCheck(args) => cmd_knockoff_check(args),
        Command::Select(args) => cmd_select(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
