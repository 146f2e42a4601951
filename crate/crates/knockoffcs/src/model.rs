//! Synthetic compressive-sensing instances.
//!
//! One trial is a triple (sparse signal, block-correlated measurement
//! matrix, noisy observation) generated from a seeded counter-based RNG.
//! The generator is ChaCha12 keyed by the experiment seed with the stream
//! index set to the trial index; a trial draws, in order, the signal, the
//! matrix, then the noise, so regenerating with the same `(seed,
//! trial_index, parameters)` reproduces the instance bit for bit.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;

/// A unit-norm sparse signal together with its support.
#[derive(Debug, Clone)]
pub struct SparseSignal {
    /// Full-length signal, zero off the support, `||values||_2 = 1`.
    pub values: Array1<f64>,
    /// Sorted indices of the nonzero entries.
    pub support: Vec<usize>,
    pub sparsity: usize,
}

/// A measurement matrix with its generation parameters.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    /// `m x n` matrix, columns rescaled to unit l2 norm when
    /// `columns_normalized` is set.
    pub entries: Array2<f64>,
    pub block_size: usize,
    pub rho: f64,
    pub columns_normalized: bool,
}

impl MeasurementMatrix {
    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    /// Wrap an externally supplied matrix (e.g. read from CSV).
    pub fn from_entries(entries: Array2<f64>) -> Self {
        MeasurementMatrix {
            entries,
            block_size: 0,
            rho: 0.0,
            columns_normalized: false,
        }
    }
}

/// Target signal-to-noise ratio for an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrDb {
    Db(f64),
    Noiseless,
}

impl std::fmt::Display for SnrDb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnrDb::Db(v) => write!(f, "{v}"),
            SnrDb::Noiseless => write!(f, "noiseless"),
        }
    }
}

impl std::str::FromStr for SnrDb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("noiseless") {
            Ok(SnrDb::Noiseless)
        } else {
            s.trim()
                .parse::<f64>()
                .map(SnrDb::Db)
                .map_err(|_| Error::Parse(format!("invalid SNR value '{s}'")))
        }
    }
}

/// A measurement vector with the noise scale that produced it.
#[derive(Debug, Clone)]
pub struct Observation {
    pub y: Array1<f64>,
    /// Per-sample noise standard deviation; 0 iff noiseless.
    pub sigma: f64,
    pub snr_db: SnrDb,
}

/// Generation parameters for one problem instance.
#[derive(Debug, Clone, Copy)]
pub struct InstanceParams {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub snr_db: SnrDb,
    pub block_size: usize,
    pub rho: f64,
}

/// One fully generated trial.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub signal: SparseSignal,
    pub matrix: MeasurementMatrix,
    pub obs: Observation,
    pub seed: u64,
    pub trial_index: u64,
}

/// The per-trial RNG: ChaCha12 keyed by `seed`, stream = `trial_index`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Draw a unit-norm signal with exactly `s` nonzero entries.
///
/// The support is sampled uniformly without replacement, nonzeros are
/// standard normal, and the vector is rescaled to unit l2 norm afterwards
/// (which preserves the support).
pub fn generate_sparse_signal<R: Rng>(n: usize, s: usize, rng: &mut R) -> Result<SparseSignal> {
    if s < 1 || s > n {
        return Err(Error::Parameter(format!(
            "sparsity s = {s} must satisfy 1 <= s <= n = {n}"
        )));
    }
    let mut support = rand::seq::index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    let mut values = Array1::<f64>::zeros(n);
    loop {
        for &j in &support {
            values[j] = rng.sample(StandardNormal);
        }
        let norm = values.dot(&values).sqrt();
        // all-zero draws have probability zero, but a redraw keeps the
        // unit-norm invariant unconditional
        if norm > 0.0 {
            values.mapv_inplace(|v| v / norm);
            break;
        }
    }
    Ok(SparseSignal {
        values,
        support,
        sparsity: s,
    })
}

/// Draw an `m x n` matrix with block-correlated columns.
///
/// Rows are i.i.d.; within each contiguous block of `block_size` columns
/// the entries are jointly Gaussian with zero mean, unit variance and
/// pairwise correlation `rho` (via the Cholesky factor of the block
/// covariance); blocks are independent. Every column is then rescaled to
/// unit l2 norm. A trailing block shorter than `block_size` is treated as
/// its own smaller block.
pub fn generate_block_correlated_matrix<R: Rng>(
    m: usize,
    n: usize,
    block_size: usize,
    rho: f64,
    rng: &mut R,
) -> Result<MeasurementMatrix> {
    if m < 1 || n < 1 {
        return Err(Error::Parameter(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    if block_size < 1 {
        return Err(Error::Parameter("block_size must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Parameter(format!(
            "rho = {rho} outside [0, 1): block covariance not positive definite"
        )));
    }
    let mut entries = Array2::<f64>::zeros((m, n));
    let mut start = 0;
    while start < n {
        let b = block_size.min(n - start);
        let mut cov = Array2::<f64>::from_elem((b, b), rho);
        for k in 0..b {
            cov[[k, k]] = 1.0;
        }
        let chol = linalg::cholesky(&cov)?;
        let mut z = Array1::<f64>::zeros(b);
        for i in 0..m {
            for zk in z.iter_mut() {
                *zk = rng.sample(StandardNormal);
            }
            for (offset, row) in chol.rows().into_iter().enumerate() {
                let mut v = 0.0;
                for k in 0..=offset {
                    v += row[k] * z[k];
                }
                entries[[i, start + offset]] = v;
            }
        }
        start += b;
    }
    for mut col in entries.columns_mut() {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|v| v / norm);
        }
    }
    Ok(MeasurementMatrix {
        entries,
        block_size,
        rho,
        columns_normalized: true,
    })
}

/// Form `y = A x + w` with the noise scale calibrated to the target SNR:
/// `sigma = sqrt(||Ax||_2^2 / 10^(SNR/10))`, `w_i ~ N(0, sigma^2)` i.i.d.
pub fn synthesize_observation<R: Rng>(
    matrix: &MeasurementMatrix,
    signal: &SparseSignal,
    snr_db: SnrDb,
    rng: &mut R,
) -> Result<Observation> {
    if matrix.n() != signal.values.len() {
        return Err(Error::Parameter(format!(
            "matrix has {} columns but signal has length {}",
            matrix.n(),
            signal.values.len()
        )));
    }
    let ax = matrix.entries.dot(&signal.values);
    match snr_db {
        SnrDb::Noiseless => Ok(Observation {
            y: ax,
            sigma: 0.0,
            snr_db,
        }),
        SnrDb::Db(db) => {
            let energy = ax.dot(&ax);
            if energy == 0.0 {
                return Err(Error::DegenerateSignal);
            }
            let sigma = (energy / 10f64.powf(db / 10.0)).sqrt();
            let mut y = ax;
            for yi in y.iter_mut() {
                let w: f64 = rng.sample(StandardNormal);
                *yi += sigma * w;
            }
            Ok(Observation { y, sigma, snr_db })
        }
    }
}

impl ProblemInstance {
    /// Generate one trial. Draw order is signal, matrix, noise, all from
    /// the `(seed, trial_index)` stream.
    pub fn generate(params: &InstanceParams, seed: u64, trial_index: u64) -> Result<Self> {
        let mut rng = trial_rng(seed, trial_index);
        Self::generate_with_rng(params, seed, trial_index, &mut rng)
    }

    /// Variant that leaves the RNG with the caller so downstream sampling
    /// (e.g. knockoff construction) can continue the same stream.
    pub fn generate_with_rng<R: Rng>(
        params: &InstanceParams,
        seed: u64,
        trial_index: u64,
        rng: &mut R,
    ) -> Result<Self> {
        let signal = generate_sparse_signal(params.n, params.s, rng)?;
        let matrix =
            generate_block_correlated_matrix(params.m, params.n, params.block_size, params.rho, rng)?;
        let obs = synthesize_observation(&matrix, &signal, params.snr_db, rng)?;
        Ok(ProblemInstance {
            signal,
            matrix,
            obs,
            seed,
            trial_index,
        })
    }
}
