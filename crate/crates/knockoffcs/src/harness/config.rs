//! Sweep configuration and its flat key=value file format.
//!
//! The format is deliberately trivial to parse from any language: one
//! `key = value` pair per line, lists in brackets (`key = [a, b, c]`),
//! `#` comments. Unknown keys are rejected so typos fail loudly.

use crate::error::{Error, Result};
use crate::filter::StatisticKind;
use crate::knockoff::{KnockoffStrategy, DEFAULT_SHRINKAGE_EPS};
use crate::model::SnrDb;

/// OMP sparsity budget policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmpK {
    /// Use the instance's true sparsity (favorable to the baseline).
    Oracle,
    Fixed(usize),
}

impl std::fmt::Display for OmpK {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OmpK::Oracle => write!(f, "oracle"),
            OmpK::Fixed(k) => write!(f, "{k}"),
        }
    }
}

/// Knockoff construction selector (file/flag syntax).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    PaperFixed,
    Gaussian,
}

impl StrategyChoice {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyChoice::PaperFixed => "paper-fixed",
            StrategyChoice::Gaussian => "gaussian",
        }
    }

    /// Concrete strategy with the harness default shrinkage.
    pub fn to_strategy(self) -> KnockoffStrategy {
        match self {
            StrategyChoice::PaperFixed => KnockoffStrategy::PaperFixed,
            StrategyChoice::Gaussian => KnockoffStrategy::GaussianEquicorrelated {
                shrinkage_eps: DEFAULT_SHRINKAGE_EPS,
            },
        }
    }
}

impl std::str::FromStr for StrategyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper-fixed" => Ok(StrategyChoice::PaperFixed),
            "gaussian" => Ok(StrategyChoice::Gaussian),
            other => Err(Error::Parse(format!(
                "unknown knockoff strategy '{other}' (expected paper-fixed or gaussian)"
            ))),
        }
    }
}

/// Full description of a simulation sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub s_list: Vec<usize>,
    pub snr_db_list: Vec<SnrDb>,
    pub trials: u64,
    pub q: f64,
    pub lasso_lambda: f64,
    pub omp_k: OmpK,
    pub knockoff_strategy: StrategyChoice,
    pub statistic: StatisticKind,
    pub seed: u64,
    pub block_size: usize,
    pub rho: f64,
    /// λ for the lasso-diff statistic, as a fraction of the augmented
    /// design's λ_max (the smallest λ with an all-zero fit). Chosen
    /// per-instance so the statistic tracks the data scale; the baseline
    /// `lasso_lambda` is independent of this.
    pub statistic_lambda_frac: f64,
}

impl Default for SweepConfig {
    /// The block-correlated benchmark grid: n in {500, 1000},
    /// m in {50, 100, 200}, s in {5, 10}, SNR in {2, 10, 30, 50} dB,
    /// 20 trials per cell, q = 0.1, baseline λ = 0.1.
    fn default() -> Self {
        SweepConfig {
            n_list: vec![500, 1000],
            m_list: vec![50, 100, 200],
            s_list: vec![5, 10],
            snr_db_list: vec![SnrDb::Db(2.0), SnrDb::Db(10.0), SnrDb::Db(30.0), SnrDb::Db(50.0)],
            trials: 20,
            q: 0.1,
            lasso_lambda: 0.1,
            omp_k: OmpK::Oracle,
            knockoff_strategy: StrategyChoice::Gaussian,
            statistic: StatisticKind::LassoDiff,
            seed: 42,
            block_size: 5,
            rho: 0.6,
            statistic_lambda_frac: 0.03,
        }
    }
}

fn parse_list(value: &str, key: &str) -> Result<Vec<String>> {
    let v = value.trim();
    let inner = if v.starts_with('[') && v.ends_with(']') {
        &v[1..v.len() - 1]
    } else {
        v
    };
    let items: Vec<String> = inner
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Error::Parse(format!("{key}: empty list")));
    }
    Ok(items)
}

fn parse_usize_list(value: &str, key: &str) -> Result<Vec<usize>> {
    parse_list(value, key)?
        .iter()
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("{key}: invalid integer '{s}'")))
        })
        .collect()
}

impl SweepConfig {
    /// Parse the flat key=value format, starting from the defaults.
    pub fn parse(text: &str) -> Result<SweepConfig> {
        let mut cfg = SweepConfig::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", line_no + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "n" | "n_list" => cfg.n_list = parse_usize_list(value, key)?,
                "m" | "m_list" => cfg.m_list = parse_usize_list(value, key)?,
                "s" | "s_list" => cfg.s_list = parse_usize_list(value, key)?,
                "snr_db" | "snr_db_list" => {
                    cfg.snr_db_list = parse_list(value, key)?
                        .iter()
                        .map(|s| s.parse::<SnrDb>())
                        .collect::<Result<Vec<_>>>()?
                }
                "trials" => {
                    cfg.trials = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("trials: invalid integer '{value}'")))?
                }
                "q" => {
                    cfg.q = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("q: invalid number '{value}'")))?
                }
                "lasso_lambda" => {
                    cfg.lasso_lambda = value.parse().map_err(|_| {
                        Error::Parse(format!("lasso_lambda: invalid number '{value}'"))
                    })?
                }
                "statistic_lambda_frac" => {
                    cfg.statistic_lambda_frac = value.parse().map_err(|_| {
                        Error::Parse(format!("statistic_lambda_frac: invalid number '{value}'"))
                    })?
                }
                "omp_k" => {
                    cfg.omp_k = if value == "oracle" {
                        OmpK::Oracle
                    } else {
                        OmpK::Fixed(value.parse().map_err(|_| {
                            Error::Parse(format!("omp_k: expected 'oracle' or an integer, got '{value}'"))
                        })?)
                    }
                }
                "knockoff_strategy" => cfg.knockoff_strategy = value.parse()?,
                "statistic" => cfg.statistic = value.parse()?,
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("seed: invalid integer '{value}'")))?
                }
                "block_size" => {
                    cfg.block_size = value.parse().map_err(|_| {
                        Error::Parse(format!("block_size: invalid integer '{value}'"))
                    })?
                }
                "rho" => {
                    cfg.rho = value
                        .parse()
                        .map_err(|_| Error::Parse(format!("rho: invalid number '{value}'")))?
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key '{other}'",
                        line_no + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<SweepConfig> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty()
            || self.m_list.is_empty()
            || self.s_list.is_empty()
            || self.snr_db_list.is_empty()
        {
            return Err(Error::Parameter("all sweep lists must be nonempty".into()));
        }
        if self.trials < 1 {
            return Err(Error::Parameter("trials must be >= 1".into()));
        }
        if !(0.0 < self.q && self.q < 1.0) {
            return Err(Error::Parameter(format!("q = {} outside (0, 1)", self.q)));
        }
        if self.lasso_lambda <= 0.0 {
            return Err(Error::Parameter("lasso_lambda must be > 0".into()));
        }
        if self.statistic_lambda_frac <= 0.0 {
            return Err(Error::Parameter("statistic_lambda_frac must be > 0".into()));
        }
        if self.block_size < 1 {
            return Err(Error::Parameter("block_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Parameter(format!("rho = {} outside [0, 1)", self.rho)));
        }
        Ok(())
    }

    /// Key=value lines echoing the full effective configuration, used as
    /// `#`-prefixed header comments in every output CSV.
    pub fn echo_lines(&self) -> Vec<String> {
        let fmt_usize_list =
            |v: &[usize]| format!("[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
        let snrs = format!(
            "[{}]",
            self.snr_db_list
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        vec![
            format!("n = {}", fmt_usize_list(&self.n_list)),
            format!("m = {}", fmt_usize_list(&self.m_list)),
            format!("s = {}", fmt_usize_list(&self.s_list)),
            format!("snr_db = {snrs}"),
            format!("trials = {}", self.trials),
            format!("q = {}", self.q),
            format!("lasso_lambda = {}", self.lasso_lambda),
            format!("omp_k = {}", self.omp_k),
            format!("knockoff_strategy = {}", self.knockoff_strategy.name()),
            format!("statistic = {}", self.statistic.name()),
            format!("statistic_lambda_frac = {}", self.statistic_lambda_frac),
            format!("seed = {}", self.seed),
            format!("block_size = {}", self.block_size),
            format!("rho = {}", self.rho),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# benchmark grid
n = [500, 1000]
m = [50, 100, 200]
s = [5, 10]
snr_db = [2, 10, 30, 50]
trials = 20
q = 0.1
lasso_lambda = 0.1
omp_k = oracle
knockoff_strategy = gaussian
statistic = lasso-diff
seed = 42
block_size = 5
rho = 0.6
";
        let cfg = SweepConfig::parse(text).unwrap();
        assert_eq!(cfg.n_list, vec![500, 1000]);
        assert_eq!(cfg.snr_db_list.len(), 4);
        assert_eq!(cfg.omp_k, OmpK::Oracle);
        assert_eq!(cfg.statistic, StatisticKind::LassoDiff);
    }

    #[test]
    fn scalar_and_noiseless_entries() {
        let cfg = SweepConfig::parse("n = 64\nm = 32\ns = 3\nsnr_db = [10, noiseless]\ntrials = 2\n")
            .unwrap();
        assert_eq!(cfg.n_list, vec![64]);
        assert_eq!(cfg.snr_db_list[1], SnrDb::Noiseless);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(SweepConfig::parse("nn = 4\n").is_err());
        assert!(SweepConfig::parse("q = 1.5\n").is_err());
        assert!(SweepConfig::parse("n = []\n").is_err());
        assert!(SweepConfig::parse("omp_k = maybe\n").is_err());
        assert!(SweepConfig::parse("trials = 0\n").is_err());
    }

    #[test]
    fn echo_roundtrips_through_parser() {
        let cfg = SweepConfig::default();
        let echoed = cfg.echo_lines().join("\n");
        let back = SweepConfig::parse(&echoed).unwrap();
        assert_eq!(back.n_list, cfg.n_list);
        assert_eq!(back.m_list, cfg.m_list);
        assert_eq!(back.trials, cfg.trials);
        assert_eq!(back.statistic, cfg.statistic);
        assert_eq!(back.seed, cfg.seed);
    }
}
