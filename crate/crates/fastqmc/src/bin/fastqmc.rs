//! Command-line front end: point-set generation, fast/standard matrix
//! products, normal point generation, the two PDE pipelines, the
//! benchmark harness, and the built-in selftest.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fastqmc::bench::{self, BenchConfig, BenchRecord, Experiment, GridPoint};
use fastqmc::fastmv::{FastPointMatrix, RowZeroPolicy};
use fastqmc::fem1d;
use fastqmc::gauss::{self, GaussianSpec};
use fastqmc::lattice::{cbc_construct, reorder_lattice, GeneratingVector, KorobovPSet, Transform};
use fastqmc::modular::PrimeModulus;
use fastqmc::{Error, Method};

#[derive(Parser)]
#[command(
    name = "fastqmc",
    about = "Fast QMC matrix-vector products over reordered lattice point sets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a QMC point set in reordered order as CSV
    Points(PointsArgs),
    /// Multiply the transformed point matrix by a vector
    Matvec(MatvecArgs),
    /// Generate normally distributed points with a general covariance
    Normalgen(NormalgenArgs),
    /// Mean FEM solution, uniform (affine) random coefficient
    PdeUniform(PdeArgs),
    /// Mean FEM solution, log-normal random coefficient
    PdeLognormal(PdeArgs),
    /// Time the standard vs fast methods over a configuration grid
    Bench(BenchArgs),
    /// Run the built-in verification suites
    Selftest,
}

#[derive(Args)]
struct PointsArgs {
    /// Number of lattice points (prime)
    #[arg(long)]
    n: Option<u64>,
    /// Korobov p-set modulus (prime); selects the p-set source
    #[arg(long)]
    k: Option<u64>,
    /// Dimension
    #[arg(long)]
    s: usize,
    /// Univariate transform applied to every coordinate
    #[arg(long, default_value = "identity")]
    transform: String,
    /// Generating vector: inline components ("1 5 3") or a file path
    #[arg(long)]
    gvec: Option<String>,
    /// CBC weight spec: jpow:<p> | geom:<r> | one | list:a,b,...
    #[arg(long, default_value = "jpow:2")]
    weights: String,
    /// Drop the zero point (row 0); defaults to true for invnorm
    #[arg(long)]
    drop_zero_point: Option<bool>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatvecArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value = "identity")]
    transform: String,
    #[arg(long)]
    gvec: Option<String>,
    #[arg(long, default_value = "jpow:2")]
    weights: String,
    /// Method: fast, std, or both (cross-checked)
    #[arg(long, default_value = "both")]
    method: String,
    /// Input vector: inline comma/space separated or a file path
    #[arg(long)]
    vec: Option<String>,
    /// Seed for the random vector when --vec is omitted
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    drop_zero_point: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NormalgenArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    s: usize,
    /// Covariance matrix CSV (s rows of s comma-separated numbers)
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Upper-triangular factor CSV (alternative to --sigma)
    #[arg(long)]
    factor: Option<PathBuf>,
    /// Mean vector CSV (one line, comma separated); zeros when omitted
    #[arg(long)]
    mu: Option<PathBuf>,
    #[arg(long)]
    gvec: Option<String>,
    #[arg(long, default_value = "jpow:2")]
    weights: String,
    #[arg(long, default_value = "fast")]
    method: String,
    /// Seed for the random factor when neither --sigma nor --factor given
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    drop_zero_point: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PdeArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    s: usize,
    /// Number of mesh intervals
    #[arg(long)]
    m: usize,
    #[arg(long)]
    gvec: Option<String>,
    #[arg(long, default_value = "jpow:2")]
    weights: String,
    #[arg(long, default_value = "fast")]
    method: String,
    #[arg(long)]
    drop_zero_point: Option<bool>,
    /// Process matrix columns in parallel (timings not comparable)
    #[arg(long, default_value_t = false)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment: normal | uniform | lognormal
    #[arg(long)]
    experiment: String,
    /// Comma-separated prime point counts, e.g. 67,127,257
    #[arg(long)]
    n_list: String,
    /// Dimension rule: 2n | n | sqrt | a fixed integer
    #[arg(long, default_value = "2n")]
    s_expr: String,
    /// Mesh rule (PDE experiments): 2n | n | sqrt | n2 | fixed integer
    #[arg(long, default_value = "2n")]
    m_expr: String,
    /// Comma-separated methods to run
    #[arg(long, default_value = "std,fast")]
    methods: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetitions per configuration
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Skip configurations projected to exceed this budget
    #[arg(long, default_value_t = f64::INFINITY)]
    budget_seconds: f64,
    #[arg(long, default_value_t = true)]
    drop_zero_point: bool,
    #[arg(long, default_value_t = false)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        // A closed stdout (e.g. piping into `head`) is not an error.
        Err(e) if is_broken_pipe(e.as_ref()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &(dyn std::error::Error + 'static)) -> bool {
    e.downcast_ref::<io::Error>()
        .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn run(command: Command) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match command {
        Command::Points(args) => cmd_points(args)?,
        Command::Matvec(args) => cmd_matvec(args)?,
        Command::Normalgen(args) => cmd_normalgen(args)?,
        Command::PdeUniform(args) => cmd_pde(args, Coefficient::Uniform)?,
        Command::PdeLognormal(args) => cmd_pde(args, Coefficient::Lognormal)?,
        Command::Bench(args) => cmd_bench(args)?,
        Command::Selftest => return cmd_selftest(),
    }
    Ok(ExitCode::SUCCESS)
}

/// All floating-point output carries 17 significant digits so values
/// round-trip exactly through text.
fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn parse_weights(spec: &str, dim: usize) -> Result<Vec<f64>, Error> {
    if spec == "one" || spec == "uniform" {
        return Ok(vec![1.0; dim]);
    }
    if let Some(p) = spec.strip_prefix("jpow:") {
        let p: f64 = p
            .parse()
            .map_err(|e| Error::Parse(format!("bad jpow exponent: {e}")))?;
        return Ok((1..=dim).map(|j| (j as f64).powf(-p)).collect());
    }
    if let Some(r) = spec.strip_prefix("geom:") {
        let r: f64 = r
            .parse()
            .map_err(|e| Error::Parse(format!("bad geom ratio: {e}")))?;
        return Ok((1..=dim).map(|j| r.powi(j as i32)).collect());
    }
    if let Some(list) = spec.strip_prefix("list:") {
        let values: Vec<f64> = list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad weight: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() < dim {
            return Err(Error::Parse(format!(
                "weight list has {} entries, need {dim}",
                values.len()
            )));
        }
        return Ok(values[..dim].to_vec());
    }
    Err(Error::Parse(format!(
        "unknown weight spec {spec:?}; expected jpow:<p>|geom:<r>|one|list:..."
    )))
}

/// Builds a generating vector from --gvec (inline components or a file in
/// the two-line text format) or by CBC construction with the weight spec.
fn resolve_generating_vector(
    n: u64,
    s: usize,
    gvec: &Option<String>,
    weights_spec: &str,
) -> Result<GeneratingVector, Box<dyn std::error::Error>> {
    let modulus = PrimeModulus::new(n)?;
    if let Some(raw) = gvec {
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let inline: Option<Vec<u64>> = tokens
            .iter()
            .map(|t| t.parse::<u64>().ok())
            .collect::<Option<Vec<u64>>>()
            .filter(|v| !v.is_empty());
        if let Some(components) = inline {
            if components.len() != s {
                return Err(Box::new(Error::DimensionMismatch {
                    expected: s,
                    got: components.len(),
                }));
            }
            return Ok(GeneratingVector::new(modulus, components)?);
        }
        let text = fs::read_to_string(raw)?;
        let gv = GeneratingVector::from_text(&text)?;
        if gv.point_count() != n || gv.dimension() != s {
            return Err(Box::new(Error::InvalidArgument(format!(
                "generating vector file is for N={}, s={}; requested N={n}, s={s}",
                gv.point_count(),
                gv.dimension()
            ))));
        }
        return Ok(gv);
    }
    // CBC construction; for s >= N the leading components repeat.
    let d = s.min(n as usize - 1);
    let weights = parse_weights(weights_spec, d)?;
    let base = cbc_construct(modulus, d, &weights)?;
    let comps: Vec<u64> = (0..s).map(|j| base.components()[j % d]).collect();
    Ok(GeneratingVector::new(modulus, comps)?)
}

fn resolve_policy(transform: Transform, flag: Option<bool>) -> Result<RowZeroPolicy, Error> {
    let drop = flag.unwrap_or(transform.value_at_zero().is_none());
    if drop {
        Ok(RowZeroPolicy::Drop)
    } else if transform.value_at_zero().is_some() {
        Ok(RowZeroPolicy::Include)
    } else {
        Err(Error::UnboundedAtZero {
            transform: transform.name(),
        })
    }
}

fn cmd_points(args: PointsArgs) -> Result<(), Box<dyn std::error::Error>> {
    let transform = Transform::from_str(&args.transform)?;
    let mut out = open_out(&args.out)?;
    match (args.k, args.n) {
        (Some(k), None) => {
            let pset = KorobovPSet::new(PrimeModulus::new(k)?, args.s);
            for g in 1..k {
                for n in 1..k {
                    let nums = pset.point_numerators(n, g)?;
                    let row: Vec<String> = nums
                        .iter()
                        .map(|&num| Ok(fmt17(transform.apply(num as f64 / k as f64)?)))
                        .collect::<Result<_, Error>>()?;
                    writeln!(out, "{}", row.join(","))?;
                }
            }
        }
        (None, Some(n)) => {
            let gv = resolve_generating_vector(n, args.s, &args.gvec, &args.weights)?;
            let lat = reorder_lattice(&gv)?;
            let policy = resolve_policy(transform, args.drop_zero_point)?;
            let first = if policy == RowZeroPolicy::Drop { 1 } else { 0 };
            for idx in first..n as usize {
                let nums = lat.point_numerators(idx)?;
                let row: Vec<String> = nums
                    .iter()
                    .map(|&num| Ok(fmt17(transform.apply(num as f64 / n as f64)?)))
                    .collect::<Result<_, Error>>()?;
                writeln!(out, "{}", row.join(","))?;
            }
        }
        _ => {
            return Err(Box::new(Error::InvalidArgument(
                "pass exactly one of --n (lattice) or --k (korobov p-set)".to_string(),
            )))
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_vector(raw: &str) -> Result<Vec<f64>, Error> {
    raw.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|e| Error::Parse(format!("bad vector entry {t:?}: {e}")))
        })
        .collect()
}

fn cmd_matvec(args: MatvecArgs) -> Result<(), Box<dyn std::error::Error>> {
    let transform = Transform::from_str(&args.transform)?;
    let gv = resolve_generating_vector(args.n, args.s, &args.gvec, &args.weights)?;
    let lat = reorder_lattice(&gv)?;
    let policy = resolve_policy(transform, args.drop_zero_point)?;
    let vector = match &args.vec {
        Some(raw) => {
            let direct = parse_vector(raw);
            match direct {
                Ok(v) if v.len() == args.s => v,
                _ => parse_vector(&fs::read_to_string(raw)?)?,
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..args.s).map(|_| rng.random_range(-1.0..1.0)).collect()
        }
    };
    if vector.len() != args.s {
        return Err(Box::new(Error::DimensionMismatch {
            expected: args.s,
            got: vector.len(),
        }));
    }
    let fast = FastPointMatrix::new(lat, transform, policy)?;
    let mut out = open_out(&args.out)?;
    match args.method.as_str() {
        "fast" => {
            writeln!(out, "fast")?;
            for v in fast.fast_matvec(&vector)? {
                writeln!(out, "{}", fmt17(v))?;
            }
        }
        "std" => {
            writeln!(out, "std")?;
            for v in fast.naive_matvec(&vector)? {
                writeln!(out, "{}", fmt17(v))?;
            }
        }
        "both" => {
            let f = fast.fast_matvec(&vector)?;
            let n = fast.naive_matvec(&vector)?;
            let max = f
                .iter()
                .zip(&n)
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            writeln!(out, "fast,std")?;
            for (x, y) in f.iter().zip(&n) {
                writeln!(out, "{},{}", fmt17(*x), fmt17(*y))?;
            }
            eprintln!("max abs deviation fast vs std: {max:.3e}");
        }
        other => {
            return Err(Box::new(Error::Parse(format!(
                "unknown method {other:?}; expected fast|std|both"
            ))))
        }
    }
    out.flush()?;
    Ok(())
}

fn read_matrix_csv(
    path: &PathBuf,
    rows: usize,
    cols: usize,
) -> Result<Array2<f64>, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path)?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut row_count = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let entries = parse_vector(line)?;
        if entries.len() != cols {
            return Err(Box::new(Error::DimensionMismatch {
                expected: cols,
                got: entries.len(),
            }));
        }
        data.extend(entries);
        row_count += 1;
    }
    if row_count != rows {
        return Err(Box::new(Error::DimensionMismatch {
            expected: rows,
            got: row_count,
        }));
    }
    Ok(Array2::from_shape_vec((rows, cols), data)?)
}

fn cmd_normalgen(args: NormalgenArgs) -> Result<(), Box<dyn std::error::Error>> {
    let gv = resolve_generating_vector(args.n, args.s, &args.gvec, &args.weights)?;
    let lat = reorder_lattice(&gv)?;
    let s = args.s;
    let factor = if let Some(path) = &args.factor {
        read_matrix_csv(path, s, s)?
    } else if let Some(path) = &args.sigma {
        let sigma = read_matrix_csv(path, s, s)?;
        gauss::cholesky_upper(&sigma)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        bench::random_upper_triangular(s, &mut rng)
    };
    let mean = match &args.mu {
        Some(path) => {
            let v = parse_vector(&fs::read_to_string(path)?)?;
            if v.len() != s {
                return Err(Box::new(Error::DimensionMismatch {
                    expected: s,
                    got: v.len(),
                }));
            }
            v
        }
        None => vec![0.0; s],
    };
    let spec = GaussianSpec::from_factor(mean, factor)?;
    let drop = args.drop_zero_point.unwrap_or(true);
    let policy = if drop {
        RowZeroPolicy::Drop
    } else {
        RowZeroPolicy::Substitute(bench::endpoint_substitute(args.n))
    };
    let method = Method::from_str(&args.method)?;
    let points = match method {
        Method::Fast => gauss::generate_normal(&lat, &spec, policy)?,
        Method::Std => gauss::generate_normal_naive(&lat, &spec, policy)?,
    };
    let mut out = open_out(&args.out)?;
    for row in points.rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

enum Coefficient {
    Uniform,
    Lognormal,
}

fn cmd_pde(args: PdeArgs, coefficient: Coefficient) -> Result<(), Box<dyn std::error::Error>> {
    let gv = resolve_generating_vector(args.n, args.s, &args.gvec, &args.weights)?;
    let lat = reorder_lattice(&gv)?;
    let method = Method::from_str(&args.method)?;
    let (mean, timings) = match coefficient {
        Coefficient::Uniform => {
            fem1d::uniform_mean_solution_opts(&lat, args.m, method, args.parallel)?
        }
        Coefficient::Lognormal => {
            let drop = args.drop_zero_point.unwrap_or(true);
            let policy = if drop {
                RowZeroPolicy::Drop
            } else {
                RowZeroPolicy::Substitute(bench::endpoint_substitute(args.n))
            };
            fem1d::lognormal_mean_solution_opts(&lat, args.m, policy, method, args.parallel)?
        }
    };
    let mut out = open_out(&args.out)?;
    writeln!(out, "x,u_mean")?;
    for (k, v) in mean.iter().enumerate() {
        let x = (k + 1) as f64 / args.m as f64;
        writeln!(out, "{},{}", fmt17(x), fmt17(*v))?;
    }
    out.flush()?;
    eprintln!("phase,seconds");
    eprintln!("assembly,{}", fmt17(timings.assembly_seconds));
    eprintln!("solve,{}", fmt17(timings.solve_seconds));
    Ok(())
}

fn parse_size_expr(expr: &str, n: u64, allow_square: bool) -> Result<usize, Error> {
    match expr {
        "2n" => Ok(2 * n as usize),
        "n" => Ok(n as usize),
        "sqrt" => Ok((n as f64).sqrt().ceil() as usize),
        "n2" if allow_square => Ok((n * n) as usize),
        other => other.parse().map_err(|_| {
            Error::Parse(format!(
                "bad size expression {other:?}; expected 2n|n|sqrt{}|<integer>",
                if allow_square { "|n2" } else { "" }
            ))
        }),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Box<dyn std::error::Error>> {
    let experiment = Experiment::from_str(&args.experiment)?;
    let n_list: Vec<u64> = args
        .n_list
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad N {t:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let mut grid = Vec::new();
    for n in n_list {
        let s = parse_size_expr(&args.s_expr, n, false)?;
        let m = match experiment {
            Experiment::Normal => None,
            _ => Some(parse_size_expr(&args.m_expr, n, true)?),
        };
        grid.push(GridPoint { n, s, m });
    }
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|t| Method::from_str(t.trim()))
        .collect::<Result<_, _>>()?;
    let mut cfg = BenchConfig::new(experiment, grid);
    cfg.methods = methods;
    cfg.seed = args.seed;
    cfg.reps = args.reps;
    cfg.budget_seconds = args.budget_seconds;
    cfg.drop_zero_point = args.drop_zero_point;
    cfg.parallel = args.parallel;
    let records = bench::run_bench(&cfg)?;
    let mut out = open_out(&args.out)?;
    writeln!(out, "{}", BenchRecord::CSV_HEADER)?;
    for record in &records {
        writeln!(out, "{}", record.to_csv_row())?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_selftest() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let results = fastqmc::selftest::run_all();
    let mut all_passed = true;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<32} {}", r.name, r.detail);
        all_passed &= r.passed;
    }
    println!(
        "{} of {} suites passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
