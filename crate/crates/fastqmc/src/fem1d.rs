//! 1D piecewise-linear FEM for the parametric two-point boundary value
//! problem `-(a(x,y) u')' = g`, `u(0) = u(1) = 0`, with fast assembly of
//! the parametric stiffness matrices over a whole QMC point set at once.
//!
//! Two coefficient models are covered: the affine ("uniform") case
//! `a(x,y) = 2 + sum_j y_j j^(-3/2) sin(2 pi j x)` with `y` mapped to
//! `[-1/2, 1/2]^s`, and the log-normal case `a = exp(2 + sum_j y_j psi_j)`
//! with `y_j` standard normal via the inverse CDF transform.

use std::time::Instant;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fastmv::{FastPointMatrix, RowZeroPolicy};
use crate::lattice::{ReorderedLattice, Transform};
use crate::Method;

/// Uniform mesh on [0,1] with `M` intervals and nodes `x_k = k/M`;
/// unknowns are the `M - 1` interior hat-function coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Mesh1D {
    intervals: usize,
}

impl Mesh1D {
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 2 intervals, got {intervals}"
            )));
        }
        Ok(Mesh1D { intervals })
    }

    #[inline]
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    #[inline]
    pub fn interior_dim(&self) -> usize {
        self.intervals - 1
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        k as f64 / self.intervals as f64
    }

    #[inline]
    pub fn element_midpoint(&self, e: usize) -> f64 {
        (e as f64 + 0.5) / self.intervals as f64
    }

    /// Hat function `phi_k(x)` for an interior node `k` in `1..M`.
    pub fn hat(&self, k: usize, x: f64) -> f64 {
        let m = self.intervals as f64;
        let xk = k as f64 / m;
        let h = 1.0 / m;
        let d = (x - xk).abs();
        if d >= h {
            0.0
        } else {
            1.0 - d * m
        }
    }

    /// Evaluates the interior-coefficient expansion at `x` (zero boundary).
    pub fn interpolate(&self, coeffs: &[f64], x: f64) -> f64 {
        debug_assert_eq!(coeffs.len(), self.interior_dim());
        let m = self.intervals as f64;
        let pos = x * m;
        let e = (pos.floor() as usize).min(self.intervals - 1);
        let frac = pos - e as f64;
        let left = if e == 0 { 0.0 } else { coeffs[e - 1] };
        let right = if e + 1 > self.interior_dim() {
            0.0
        } else {
            coeffs[e]
        };
        left * (1.0 - frac) + right * frac
    }
}

/// A tridiagonal matrix stored by diagonals. All stiffness matrices here
/// are symmetric; the general sub/super form is kept for the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyInput);
        }
        if sub.len() + 1 != diag.len() || sup.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                got: sub.len().max(sup.len()),
            });
        }
        Ok(Tridiagonal { sub, diag, sup })
    }

    pub fn symmetric(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        Tridiagonal::new(off.clone(), diag, off)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    #[inline]
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    #[inline]
    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    #[inline]
    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    pub fn is_symmetric(&self) -> bool {
        self.sub == self.sup
    }

    /// Dense-free `T x` for residual checks.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.sup[i] * x[i + 1];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Thomas algorithm: O(M) elimination for a nonsingular tridiagonal
    /// system. No pivoting; SPD inputs keep the pivots positive.
    pub fn thomas_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut diag = self.diag.clone();
        let mut r = rhs.to_vec();
        for i in 1..n {
            let pivot = diag[i - 1];
            if pivot.abs() < 1e-300 {
                return Err(Error::ZeroPivot { index: i - 1 });
            }
            let factor = self.sub[i - 1] / pivot;
            diag[i] -= factor * self.sup[i - 1];
            r[i] -= factor * r[i - 1];
        }
        let last = diag[n - 1];
        if last.abs() < 1e-300 {
            return Err(Error::ZeroPivot { index: n - 1 });
        }
        let mut x = vec![0.0; n];
        x[n - 1] = r[n - 1] / last;
        for i in (0..n - 1).rev() {
            x[i] = (r[i] - self.sup[i] * x[i + 1]) / diag[i];
        }
        Ok(x)
    }

    /// True when every elimination pivot stays strictly positive, which
    /// for a symmetric matrix certifies positive definiteness.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.dim();
        let mut diag = self.diag.clone();
        for i in 0..n {
            if diag[i] <= 0.0 {
                return false;
            }
            if i + 1 < n {
                let factor = self.sub[i] / diag[i];
                diag[i + 1] -= factor * self.sup[i];
            }
        }
        true
    }
}

/// Free-function form of [`Tridiagonal::thomas_solve`].
pub fn thomas_solve(t: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    t.thomas_solve(rhs)
}

/// The test-problem coefficient series: `psi_0 = 2` and
/// `psi_j(x) = j^(-3/2) sin(2 pi j x)`, truncated at `dimension` terms.
#[derive(Debug, Clone, Copy)]
pub struct AffineCoefficient {
    pub dimension: usize,
}

impl AffineCoefficient {
    #[inline]
    pub fn psi0(&self) -> f64 {
        2.0
    }

    #[inline]
    pub fn psi(&self, j: usize, x: f64) -> f64 {
        debug_assert!(j >= 1);
        (j as f64).powf(-1.5) * (2.0 * std::f64::consts::PI * j as f64 * x).sin()
    }

    /// `a(x, y) = 2 + sum_{j<=s} y_j psi_j(x)`.
    pub fn value(&self, x: f64, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dimension);
        let mut acc = self.psi0();
        for (j, &yj) in y.iter().enumerate() {
            acc += yj * self.psi(j + 1, x);
        }
        acc
    }

    /// Worst-case lower bound of the truncated coefficient over
    /// `y in [-1/2, 1/2]^s`: `2 - (1/2) sum_j j^(-3/2)`.
    pub fn uniform_lower_bound(&self) -> f64 {
        let tail: f64 = (1..=self.dimension).map(|j| (j as f64).powf(-1.5)).sum();
        2.0 - 0.5 * tail
    }
}

/// `sin(2 pi a / m)` with the argument reduced mod `m` first, so exact
/// sine roots (a multiple of m, or of m/2) come out exactly zero.
#[inline]
fn sin_two_pi_over(a: u64, m: u64) -> f64 {
    let r = a % m;
    if r == 0 || 2 * r == m {
        0.0
    } else {
        (2.0 * std::f64::consts::PI * r as f64 / m as f64).sin()
    }
}

/// `sin(pi a / m)` with the argument reduced mod `2m`; multiples of m are
/// exact roots.
#[inline]
fn sin_pi_over(a: u64, m: u64) -> f64 {
    let r = a % (2 * m);
    if r.is_multiple_of(m) {
        0.0
    } else {
        (std::f64::consts::PI * r as f64 / m as f64).sin()
    }
}

/// Stiffness matrix of the constant coefficient `psi_0 = 2`: diagonal
/// `4M`, off-diagonal `-2M`, dimension `M - 1`.
pub fn assemble_a0(m: usize) -> Result<Tridiagonal> {
    let mesh = Mesh1D::new(m)?;
    let dim = mesh.interior_dim();
    let mf = m as f64;
    Tridiagonal::symmetric(vec![4.0 * mf; dim], vec![-2.0 * mf; dim.saturating_sub(1)])
}

fn aj_scale(m: usize, j: usize) -> f64 {
    (m * m) as f64 / (std::f64::consts::PI * (j as f64).powf(2.5))
}

fn aj_diag_entry(m: usize, j: usize, k: usize) -> f64 {
    aj_scale(m, j)
        * sin_two_pi_over(j as u64, m as u64)
        * sin_two_pi_over(j as u64 * k as u64, m as u64)
}

/// Entry at `(k, k+1)` (and by symmetry `(k+1, k)`).
fn aj_super_entry(m: usize, j: usize, k: usize) -> f64 {
    -aj_scale(m, j)
        * sin_pi_over(j as u64, m as u64)
        * sin_pi_over(j as u64 * (2 * k as u64 + 1), m as u64)
}

/// Stiffness matrix of `psi_j(x) = j^(-3/2) sin(2 pi j x)` in closed form.
pub fn assemble_aj(m: usize, j: usize) -> Result<Tridiagonal> {
    if j < 1 {
        return Err(Error::InvalidArgument(
            "assemble_aj requires j >= 1".to_string(),
        ));
    }
    let mesh = Mesh1D::new(m)?;
    let dim = mesh.interior_dim();
    let diag: Vec<f64> = (1..=dim).map(|k| aj_diag_entry(m, j, k)).collect();
    let off: Vec<f64> = (1..dim).map(|k| aj_super_entry(m, j, k)).collect();
    Tridiagonal::symmetric(diag, off)
}

/// The per-position right-hand sides `b_{k,l}` of the uniform case,
/// stored as dense tables over the point index: `diag` is rows x (M-1),
/// `off` is rows x (M-2).
struct StiffnessTables {
    diag: Array2<f64>,
    off: Array2<f64>,
}

/// Columns of the gathered coefficient vectors `a_{k,l}`: first the M-1
/// diagonal positions, then the M-2 superdiagonal positions.
fn uniform_position_columns(m: usize, s: usize) -> Array2<f64> {
    let dim = m - 1;
    let mut cols = Array2::<f64>::zeros((s, 2 * dim - 1));
    for j in 1..=s {
        let scale = aj_scale(m, j);
        let sd = sin_two_pi_over(j as u64, m as u64);
        let so = sin_pi_over(j as u64, m as u64);
        for k in 1..=dim {
            cols[[j - 1, k - 1]] = scale * sd * sin_two_pi_over(j as u64 * k as u64, m as u64);
        }
        for k in 1..dim {
            cols[[j - 1, dim + k - 1]] =
                -scale * so * sin_pi_over(j as u64 * (2 * k as u64 + 1), m as u64);
        }
    }
    cols
}

fn uniform_b_tables(
    lattice: &ReorderedLattice,
    m: usize,
    method: Method,
    parallel: bool,
) -> Result<StiffnessTables> {
    let mesh = Mesh1D::new(m)?;
    let dim = mesh.interior_dim();
    let s = lattice.dimension();
    let cols = uniform_position_columns(m, s);
    let fast = FastPointMatrix::new(
        lattice.clone(),
        Transform::ShiftHalf,
        RowZeroPolicy::Include,
    )?;
    let b = match method {
        Method::Fast => fast.fast_matmat_opts(&cols.view(), parallel)?,
        Method::Std => fast.naive_matmat_opts(&cols.view(), parallel)?,
    };
    let rows = b.nrows();
    let mf = m as f64;
    let mut diag = Array2::<f64>::zeros((rows, dim));
    let mut off = Array2::<f64>::zeros((rows, dim.saturating_sub(1)));
    for n in 0..rows {
        for k in 0..dim {
            diag[[n, k]] = 4.0 * mf + b[[n, k]];
        }
        for k in 0..dim - 1 {
            off[[n, k]] = -2.0 * mf + b[[n, dim + k]];
        }
    }
    Ok(StiffnessTables { diag, off })
}

fn tables_to_matrices(tables: &StiffnessTables) -> Vec<Tridiagonal> {
    (0..tables.diag.nrows())
        .map(|n| {
            Tridiagonal::symmetric(tables.diag.row(n).to_vec(), tables.off.row(n).to_vec())
                .expect("table rows form a valid tridiagonal")
        })
        .collect()
}

/// Fast assembly of all N stiffness matrices `B(y_n)` of the uniform
/// case: O(M) fast products instead of the O(M N s) standard loop.
pub fn assemble_uniform_fast(lattice: &ReorderedLattice, m: usize) -> Result<Vec<Tridiagonal>> {
    Ok(tables_to_matrices(&uniform_b_tables(
        lattice,
        m,
        Method::Fast,
        false,
    )?))
}

/// Standard assembly `B(y_n) = A_0 + sum_j y_nj A_j`, the benchmark
/// baseline.
pub fn assemble_uniform_std(lattice: &ReorderedLattice, m: usize) -> Result<Vec<Tridiagonal>> {
    Ok(tables_to_matrices(&uniform_b_tables(
        lattice,
        m,
        Method::Std,
        false,
    )?))
}

/// Values `psi_j(x_e)` at the element midpoints, as an s x M column
/// matrix for the theta product. `amplitude` scales every psi_j and is
/// 1 everywhere except limit tests.
fn psi_midpoint_columns(m: usize, s: usize, amplitude: f64) -> Array2<f64> {
    let mesh = Mesh1D::new(m).expect("caller validated m");
    let coeff = AffineCoefficient { dimension: s };
    Array2::from_shape_fn((s, m), |(j, e)| {
        amplitude * coeff.psi(j + 1, mesh.element_midpoint(e))
    })
}

fn lognormal_b_tables(
    lattice: &ReorderedLattice,
    m: usize,
    policy: RowZeroPolicy,
    method: Method,
    amplitude: f64,
    parallel: bool,
) -> Result<StiffnessTables> {
    let mesh = Mesh1D::new(m)?;
    let dim = mesh.interior_dim();
    let s = lattice.dimension();
    let psi_cols = psi_midpoint_columns(m, s, amplitude);
    let fast = FastPointMatrix::new(lattice.clone(), Transform::InvNormalCdf, policy)?;
    // theta[n, e] = psi_0 + (Y Psi)[n, e] at the midpoint of element e.
    let mut theta = match method {
        Method::Fast => fast.fast_matmat_opts(&psi_cols.view(), parallel)?,
        Method::Std => fast.naive_matmat_opts(&psi_cols.view(), parallel)?,
    };
    theta.mapv_inplace(|v| (v + 2.0).exp());
    let a_vals = theta;
    let rows = a_vals.nrows();
    let mf = m as f64;
    // Midpoint rule with weight 1/M per element, restricted to the
    // support intersection: two elements for a diagonal pair, one for an
    // off-diagonal pair. The gradient product contributes +/- M^2.
    let mut diag = Array2::<f64>::zeros((rows, dim));
    let mut off = Array2::<f64>::zeros((rows, dim.saturating_sub(1)));
    for n in 0..rows {
        for k in 1..=dim {
            diag[[n, k - 1]] = mf * (a_vals[[n, k - 1]] + a_vals[[n, k]]);
        }
        for k in 1..dim {
            off[[n, k - 1]] = -mf * a_vals[[n, k]];
        }
    }
    Ok(StiffnessTables { diag, off })
}

/// Fast assembly of the log-normal stiffness matrices: the coefficient
/// exponents `Theta = Psi0 + Y Psi` come from fast products, then a
/// midpoint quadrature per support element forms each entry.
pub fn assemble_lognormal_fast(
    lattice: &ReorderedLattice,
    m: usize,
    policy: RowZeroPolicy,
) -> Result<Vec<Tridiagonal>> {
    Ok(tables_to_matrices(&lognormal_b_tables(
        lattice,
        m,
        policy,
        Method::Fast,
        1.0,
        false,
    )?))
}

/// Standard log-normal assembly, evaluating the exponents row by row.
pub fn assemble_lognormal_std(
    lattice: &ReorderedLattice,
    m: usize,
    policy: RowZeroPolicy,
) -> Result<Vec<Tridiagonal>> {
    Ok(tables_to_matrices(&lognormal_b_tables(
        lattice,
        m,
        policy,
        Method::Std,
        1.0,
        false,
    )?))
}

/// Arithmetic mean of the per-point FEM coefficient vectors.
pub fn mean_solution(solutions: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = solutions.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    let mut acc = vec![0.0f64; dim];
    for sol in solutions {
        if sol.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: sol.len(),
            });
        }
        for (a, v) in acc.iter_mut().zip(sol) {
            *a += v;
        }
    }
    let scale = 1.0 / solutions.len() as f64;
    for a in &mut acc {
        *a *= scale;
    }
    Ok(acc)
}

/// Wall-clock breakdown of an assemble-then-solve pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTimings {
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

fn mean_from_tables(tables: &StiffnessTables, rhs: &[f64]) -> Result<Vec<f64>> {
    let rows = tables.diag.nrows();
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    let dim = tables.diag.ncols();
    let mut acc = vec![0.0f64; dim];
    for n in 0..rows {
        let tri = Tridiagonal::symmetric(tables.diag.row(n).to_vec(), tables.off.row(n).to_vec())?;
        let sol = tri.thomas_solve(rhs)?;
        for (a, v) in acc.iter_mut().zip(&sol) {
            *a += v;
        }
    }
    let scale = 1.0 / rows as f64;
    for a in &mut acc {
        *a *= scale;
    }
    Ok(acc)
}

/// Full uniform-case pipeline: assemble all stiffness matrices, solve one
/// tridiagonal system per point (streaming, load vector all ones), and
/// average the coefficient vectors.
pub fn uniform_mean_solution(
    lattice: &ReorderedLattice,
    m: usize,
    method: Method,
) -> Result<(Vec<f64>, PhaseTimings)> {
    uniform_mean_solution_opts(lattice, m, method, false)
}

pub fn uniform_mean_solution_opts(
    lattice: &ReorderedLattice,
    m: usize,
    method: Method,
    parallel: bool,
) -> Result<(Vec<f64>, PhaseTimings)> {
    let t0 = Instant::now();
    let tables = uniform_b_tables(lattice, m, method, parallel)?;
    let assembly_seconds = t0.elapsed().as_secs_f64();
    let rhs = vec![1.0; m - 1];
    let t1 = Instant::now();
    let mean = mean_from_tables(&tables, &rhs)?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    Ok((
        mean,
        PhaseTimings {
            assembly_seconds,
            solve_seconds,
        },
    ))
}

/// Full log-normal pipeline; row 0 follows the given endpoint policy.
pub fn lognormal_mean_solution(
    lattice: &ReorderedLattice,
    m: usize,
    policy: RowZeroPolicy,
    method: Method,
) -> Result<(Vec<f64>, PhaseTimings)> {
    lognormal_mean_solution_opts(lattice, m, policy, method, false)
}

pub fn lognormal_mean_solution_opts(
    lattice: &ReorderedLattice,
    m: usize,
    policy: RowZeroPolicy,
    method: Method,
    parallel: bool,
) -> Result<(Vec<f64>, PhaseTimings)> {
    let t0 = Instant::now();
    let tables = lognormal_b_tables(lattice, m, policy, method, 1.0, parallel)?;
    let assembly_seconds = t0.elapsed().as_secs_f64();
    let rhs = vec![1.0; m - 1];
    let t1 = Instant::now();
    let mean = mean_from_tables(&tables, &rhs)?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    Ok((
        mean,
        PhaseTimings {
            assembly_seconds,
            solve_seconds,
        },
    ))
}
