//! Benchmark harness: times the standard and fast methods over
//! configuration grids for the three application experiments and emits
//! machine-readable records. Wall-clock numbers are machine-specific;
//! what the harness certifies is agreement of outputs (via checksums)
//! and the shape of the speedup trend.

use std::time::Instant;

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fastmv::RowZeroPolicy;
use crate::fem1d;
use crate::gauss::{self, GaussianSpec};
use crate::lattice::{self, GeneratingVector, ReorderedLattice};
use crate::modular::PrimeModulus;
use crate::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Normal,
    Uniform,
    Lognormal,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Normal => "normal",
            Experiment::Uniform => "uniform",
            Experiment::Lognormal => "lognormal",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Experiment::Normal),
            "uniform" => Ok(Experiment::Uniform),
            "lognormal" => Ok(Experiment::Lognormal),
            other => Err(Error::Parse(format!(
                "unknown experiment {other:?}; expected normal|uniform|lognormal"
            ))),
        }
    }
}

/// One benchmark configuration: point count, truncation dimension, and
/// (for the PDE experiments) mesh size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub n: u64,
    pub s: usize,
    pub m: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub experiment: Experiment,
    pub grid: Vec<GridPoint>,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub reps: usize,
    pub budget_seconds: f64,
    pub drop_zero_point: bool,
    pub parallel: bool,
}

impl BenchConfig {
    pub fn new(experiment: Experiment, grid: Vec<GridPoint>) -> Self {
        BenchConfig {
            experiment,
            grid,
            methods: vec![Method::Std, Method::Fast],
            seed: 0,
            reps: 5,
            budget_seconds: f64::INFINITY,
            drop_zero_point: true,
            parallel: false,
        }
    }
}

/// One timed run of one method on one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub experiment: &'static str,
    pub n: u64,
    pub s: usize,
    pub m: Option<usize>,
    pub method: &'static str,
    pub reps: usize,
    pub mean_seconds: f64,
    pub median_seconds: f64,
    pub checksum: String,
    pub skipped: bool,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str =
        "experiment,n,s,m,method,reps,mean_seconds,median_seconds,checksum,skipped";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e},{},{}",
            self.experiment,
            self.n,
            self.s,
            self.m.map_or(String::new(), |m| m.to_string()),
            self.method,
            self.reps,
            self.mean_seconds,
            self.median_seconds,
            self.checksum,
            self.skipped
        )
    }
}

/// Deterministic generating vector for benchmark lattices: CBC with the
/// default weights up to `min(s, N-1)` components, repeated cyclically
/// beyond that (the construction criterion rejects s >= N outright, and
/// the benchmark grids run s = 2N).
pub fn tiled_cbc_vector(modulus: PrimeModulus, s: usize) -> Result<GeneratingVector> {
    let d = s.min(modulus.value() as usize - 1);
    if d == 0 {
        return GeneratingVector::new(modulus, vec![]);
    }
    let base = lattice::cbc_construct(modulus, d, &lattice::default_weights(d))?;
    let comps: Vec<u64> = (0..s).map(|j| base.components()[j % d]).collect();
    GeneratingVector::new(modulus, comps)
}

/// Seeded random upper-triangular factor with positive diagonal:
/// off-diagonal entries uniform on [-1, 1], diagonal uniform on
/// [0.5, 1.5]. This matches the role of a Cholesky factor of a random
/// covariance without constructing one.
pub fn random_upper_triangular(s: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::<f64>::zeros((s, s));
    for i in 0..s {
        a[[i, i]] = rng.random_range(0.5..1.5);
        for j in i + 1..s {
            a[[i, j]] = rng.random_range(-1.0..1.0);
        }
    }
    a
}

/// Rounds to 8 significant digits and hashes, so the standard and fast
/// routes (which differ only by FFT-level roundoff well below that)
/// produce identical digests.
pub struct OutputChecksum {
    hasher: Sha256,
}

impl OutputChecksum {
    pub fn new() -> Self {
        OutputChecksum {
            hasher: Sha256::new(),
        }
    }

    pub fn push(&mut self, value: f64) {
        let rounded = format!("{:.7e}", value);
        // Avoid a -0/+0 digest split.
        let canonical = if rounded.starts_with("-0.0000000e") {
            rounded[1..].to_string()
        } else {
            rounded
        };
        self.hasher.update(canonical.as_bytes());
        self.hasher.update(b",");
    }

    pub fn push_all<'a>(&mut self, values: impl IntoIterator<Item = &'a f64>) {
        for &v in values {
            self.push(v);
        }
    }

    pub fn finish(self) -> String {
        let digest = self.hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Default for OutputChecksum {
    fn default() -> Self {
        Self::new()
    }
}

fn checksum_of(values: impl IntoIterator<Item = f64>) -> String {
    let mut c = OutputChecksum::new();
    for v in values {
        c.push(v);
    }
    c.finish()
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Relative cost model used only to project whether a configuration fits
/// the time budget, from the last measured run of the same method.
fn cost_model(experiment: Experiment, method: Method, point: &GridPoint) -> f64 {
    let n = point.n as f64;
    let s = point.s as f64;
    let m = point.m.unwrap_or(1) as f64;
    let logn = n.log2().max(1.0);
    match (experiment, method) {
        (Experiment::Normal, Method::Std) => n * s * s,
        (Experiment::Normal, Method::Fast) => s * n * logn,
        (_, Method::Std) => m * n * s,
        (_, Method::Fast) => m * n * logn,
    }
}

struct RunOutput {
    checksum: String,
    seconds: f64,
}

fn run_once(
    cfg: &BenchConfig,
    point: &GridPoint,
    method: Method,
    lat: &ReorderedLattice,
    factor: Option<&Array2<f64>>,
) -> Result<RunOutput> {
    let start = Instant::now();
    let checksum = match cfg.experiment {
        Experiment::Normal => {
            let spec = GaussianSpec::from_factor(
                vec![0.0; point.s],
                factor.expect("normal experiment has a factor").clone(),
            )?;
            let policy = normal_policy(cfg, point.n);
            let out = match method {
                Method::Fast => gauss::generate_normal(lat, &spec, policy)?,
                Method::Std => gauss::generate_normal_naive(lat, &spec, policy)?,
            };
            checksum_of(out.iter().copied())
        }
        Experiment::Uniform => {
            let m = point.m.ok_or_else(|| {
                Error::InvalidArgument("uniform experiment needs a mesh size".to_string())
            })?;
            let (mean, _) = fem1d::uniform_mean_solution_opts(lat, m, method, cfg.parallel)?;
            checksum_of(mean)
        }
        Experiment::Lognormal => {
            let m = point.m.ok_or_else(|| {
                Error::InvalidArgument("lognormal experiment needs a mesh size".to_string())
            })?;
            let policy = if cfg.drop_zero_point {
                RowZeroPolicy::Drop
            } else {
                RowZeroPolicy::Substitute(endpoint_substitute(point.n))
            };
            let (mean, _) =
                fem1d::lognormal_mean_solution_opts(lat, m, policy, method, cfg.parallel)?;
            checksum_of(mean)
        }
    };
    Ok(RunOutput {
        checksum,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn normal_policy(cfg: &BenchConfig, n: u64) -> RowZeroPolicy {
    if cfg.drop_zero_point {
        RowZeroPolicy::Drop
    } else {
        RowZeroPolicy::Substitute(endpoint_substitute(n))
    }
}

/// Finite stand-in for `Phi^{-1}(0)` when all N rows are requested: the
/// quantile of half the smallest positive lattice coordinate.
pub fn endpoint_substitute(n: u64) -> f64 {
    gauss::inv_normal_cdf(0.5 / n as f64).expect("argument strictly inside (0,1)")
}

/// Runs the configured grid. Both methods of one configuration must agree
/// on the output checksum; a projected budget overrun records a skipped
/// row instead of running (mirroring extrapolated table entries).
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.reps == 0 {
        return Err(Error::InvalidArgument("reps must be positive".to_string()));
    }
    let mut records = Vec::new();
    let mut last_run: Vec<Option<(GridPoint, f64)>> = vec![None; cfg.methods.len()];
    for point in &cfg.grid {
        let modulus = PrimeModulus::new(point.n)?;
        let gv = tiled_cbc_vector(modulus, point.s)?;
        let lat = lattice::reorder_lattice(&gv)?;
        // One factor per configuration, deterministic in (seed, n, s).
        let factor = if cfg.experiment == Experiment::Normal {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ point.n ^ (point.s as u64) << 20);
            Some(random_upper_triangular(point.s, &mut rng))
        } else {
            None
        };
        let mut checksums: Vec<(Method, String)> = Vec::new();
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let projected = last_run[mi].map(|(prev, secs)| {
                secs * cost_model(cfg.experiment, method, point)
                    / cost_model(cfg.experiment, method, &prev)
            });
            if projected.is_some_and(|p| p * cfg.reps as f64 > cfg.budget_seconds) {
                records.push(BenchRecord {
                    experiment: cfg.experiment.as_str(),
                    n: point.n,
                    s: point.s,
                    m: point.m,
                    method: method.as_str(),
                    reps: 0,
                    mean_seconds: f64::NAN,
                    median_seconds: f64::NAN,
                    checksum: "skipped".to_string(),
                    skipped: true,
                });
                continue;
            }
            let mut times = Vec::with_capacity(cfg.reps);
            let mut checksum = String::new();
            for _ in 0..cfg.reps {
                let out = run_once(cfg, point, method, &lat, factor.as_ref())?;
                times.push(out.seconds);
                checksum = out.checksum;
            }
            let mean = times.iter().sum::<f64>() / times.len() as f64;
            let med = median(&mut times);
            last_run[mi] = Some((*point, med));
            checksums.push((method, checksum.clone()));
            records.push(BenchRecord {
                experiment: cfg.experiment.as_str(),
                n: point.n,
                s: point.s,
                m: point.m,
                method: method.as_str(),
                reps: cfg.reps,
                mean_seconds: mean,
                median_seconds: med,
                checksum,
                skipped: false,
            });
        }
        if let Some((first, rest)) = checksums.split_first() {
            for other in rest {
                if other.1 != first.1 {
                    return Err(Error::InvalidArgument(format!(
                        "checksum mismatch between {} and {} at N={}, s={}: {} vs {}",
                        first.0.as_str(),
                        other.0.as_str(),
                        point.n,
                        point.s,
                        first.1,
                        other.1
                    )));
                }
            }
        }
    }
    Ok(records)
}
