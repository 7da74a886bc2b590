//! Built-in verification suites behind the `selftest` CLI command:
//! reproduction of the small worked example, factorization and oracle
//! equivalence checks, and the p-set and FEM assembly cross-checks.

use ndarray::{Array2, ArrayView2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::fastmv::{FastPointMatrix, KorobovFastMatrix, RowZeroPolicy};
use crate::fem1d;
use crate::lattice::{reorder_lattice, GeneratingVector, KorobovPSet, ReorderedLattice, Transform};
use crate::modular::PrimeModulus;
use crate::Method;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub max_deviation: f64,
    pub detail: String,
}

impl SuiteResult {
    fn from_deviation(name: &'static str, max_deviation: f64, tolerance: f64) -> Self {
        SuiteResult {
            name,
            passed: max_deviation <= tolerance,
            max_deviation,
            detail: format!("max deviation {max_deviation:.3e} (tolerance {tolerance:.1e})"),
        }
    }
}

/// Maximum absolute deviation between claimed point-matrix rows and the
/// directly transformed lattice points. Exposed so a deliberately
/// corrupted matrix can be shown to trip the check.
pub fn factorization_deviation(
    lattice: &ReorderedLattice,
    transform: Transform,
    rows: &ArrayView2<f64>,
    skip_zero_row: bool,
) -> f64 {
    let offset = if skip_zero_row { 1 } else { 0 };
    let mut max = 0.0f64;
    for i in 0..rows.nrows() {
        let point = lattice.point(i + offset).expect("row within range");
        for j in 0..rows.ncols() {
            let expected = transform.apply(point[j]).expect("interior coordinate");
            max = max.max((rows[[i, j]] - expected).abs());
        }
    }
    max
}

fn random_lattice(rng: &mut ChaCha8Rng, n: u64, s: usize) -> ReorderedLattice {
    let modulus = PrimeModulus::new(n).unwrap();
    let comps: Vec<u64> = (0..s).map(|_| rng.random_range(1..n)).collect();
    reorder_lattice(&GeneratingVector::new(modulus, comps).unwrap()).unwrap()
}

fn worked_example_suite() -> SuiteResult {
    let name = "worked example reproduction";
    let gv = GeneratingVector::new(PrimeModulus::new(7).unwrap(), vec![1, 5, 3]).unwrap();
    let lat = reorder_lattice(&gv).unwrap();
    let expected_points: [[u64; 3]; 7] = [
        [0, 0, 0],
        [1, 5, 3],
        [5, 4, 1],
        [4, 6, 5],
        [6, 2, 4],
        [2, 3, 6],
        [3, 1, 2],
    ];
    let structural_ok = lat.root().value() == 3
        && lat.root().inverse() == 5
        && lat.exponents() == [1, 6, 2]
        && (0..7).all(|n| lat.point_numerators(n).unwrap() == expected_points[n]);
    if !structural_ok {
        return SuiteResult {
            name,
            passed: false,
            max_deviation: f64::INFINITY,
            detail: "root, exponents, or point list disagree with the reference".to_string(),
        };
    }
    let fast =
        FastPointMatrix::new(lat.clone(), Transform::Identity, RowZeroPolicy::Include).unwrap();
    let eye = Array2::<f64>::eye(3);
    let rows = fast.fast_matmat(&eye.view()).unwrap();
    let dev = factorization_deviation(&lat, Transform::Identity, &rows.view(), false);
    SuiteResult::from_deviation(name, dev, 1e-12)
}

fn factorization_suite() -> SuiteResult {
    let name = "fastmv factorization identity";
    let mut rng = ChaCha8Rng::seed_from_u64(0xFA57);
    let mut max = 0.0f64;
    for n in [7u64, 31, 101] {
        for transform in [Transform::Identity, Transform::Tent] {
            let lat = random_lattice(&mut rng, n, 5);
            let fast =
                FastPointMatrix::new(lat.clone(), transform, RowZeroPolicy::Include).unwrap();
            let eye = Array2::<f64>::eye(5);
            let rows = fast.fast_matmat(&eye.view()).unwrap();
            max = max.max(factorization_deviation(
                &lat,
                transform,
                &rows.view(),
                false,
            ));
        }
    }
    SuiteResult::from_deviation(name, max, 1e-11)
}

fn oracle_suite() -> SuiteResult {
    let name = "fast vs naive matvec oracle";
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut max = 0.0f64;
    for _ in 0..10 {
        let primes = [13u64, 53, 211, 1021];
        let n = primes[rng.random_range(0..primes.len())];
        let s = rng.random_range(1..60usize);
        let transform = Transform::ALL[rng.random_range(0..4)];
        let lat = random_lattice(&mut rng, n, s);
        let fast =
            FastPointMatrix::new(lat, transform, RowZeroPolicy::default_for(transform)).unwrap();
        let a: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = fast.fast_matvec(&a).unwrap();
        let nv = fast.naive_matvec(&a).unwrap();
        for (x, y) in f.iter().zip(&nv) {
            max = max.max((x - y).abs());
        }
    }
    SuiteResult::from_deviation(name, max, 1e-9)
}

fn korobov_suite() -> SuiteResult {
    let name = "korobov p-set equivalence";
    let mut rng = ChaCha8Rng::seed_from_u64(0x0522);
    let mut max = 0.0f64;
    for k in [3u64, 7, 13] {
        for s in 1..=3usize {
            let pset = KorobovPSet::new(PrimeModulus::new(k).unwrap(), s);
            // Multiset equality against the direct double enumeration.
            let mut ours: Vec<Vec<u64>> = Vec::new();
            for g in 1..k {
                for n in 1..k {
                    ours.push(pset.point_numerators(n, g).unwrap());
                }
            }
            ours.sort();
            let mut reference: Vec<Vec<u64>> = Vec::new();
            for g in 1..k {
                for n in 1..k {
                    let mut row = Vec::with_capacity(s);
                    let mut power = 1u64;
                    for _ in 0..s {
                        row.push(n * power % k);
                        power = power * g % k;
                    }
                    reference.push(row);
                }
            }
            reference.sort();
            if ours != reference {
                return SuiteResult {
                    name,
                    passed: false,
                    max_deviation: f64::INFINITY,
                    detail: format!("point multiset mismatch at K={k}, s={s}"),
                };
            }
            let fast = KorobovFastMatrix::new(pset, Transform::Tent).unwrap();
            let a: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = fast.fast_matvec(&a).unwrap();
            let nv = fast.naive_matvec(&a).unwrap();
            for (x, y) in f.iter().zip(&nv) {
                max = max.max((x - y).abs());
            }
        }
    }
    SuiteResult::from_deviation(name, max, 1e-10)
}

fn fem_suite() -> SuiteResult {
    let name = "fem assembly equivalence";
    let mut rng = ChaCha8Rng::seed_from_u64(0xFE13);
    let lat = random_lattice(&mut rng, 13, 13);
    let m = 8;
    let mut max = 0.0f64;
    let fast_u = fem1d::assemble_uniform_fast(&lat, m).unwrap();
    let std_u = fem1d::assemble_uniform_std(&lat, m).unwrap();
    for (a, b) in fast_u.iter().zip(&std_u) {
        for (x, y) in a.diag().iter().zip(b.diag()) {
            max = max.max((x - y).abs());
        }
        for (x, y) in a.sup().iter().zip(b.sup()) {
            max = max.max((x - y).abs());
        }
    }
    let fast_l = fem1d::assemble_lognormal_fast(&lat, m, RowZeroPolicy::Drop).unwrap();
    let std_l = fem1d::assemble_lognormal_std(&lat, m, RowZeroPolicy::Drop).unwrap();
    for (a, b) in fast_l.iter().zip(&std_l) {
        for (x, y) in a.diag().iter().zip(b.diag()) {
            max = max.max((x - y).abs() / y.abs().max(1.0));
        }
        for (x, y) in a.sup().iter().zip(b.sup()) {
            max = max.max((x - y).abs() / y.abs().max(1.0));
        }
    }
    let (mean_fast, _) = fem1d::uniform_mean_solution(&lat, m, Method::Fast).unwrap();
    let (mean_std, _) = fem1d::uniform_mean_solution(&lat, m, Method::Std).unwrap();
    for (x, y) in mean_fast.iter().zip(&mean_std) {
        max = max.max((x - y).abs());
    }
    SuiteResult::from_deviation(name, max, 1e-9)
}

/// Runs every suite; the CLI turns the results into a report and an exit
/// status.
pub fn run_all() -> Vec<SuiteResult> {
    vec![
        worked_example_suite(),
        factorization_suite(),
        oracle_suite(),
        korobov_suite(),
        fem_suite(),
    ]
}
