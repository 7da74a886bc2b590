//! Fast products `Y a` and `Y A` for reordered lattice and Korobov p-set
//! point matrices through the factorization `Y' = Z P`: a scatter of the
//! input through the 0/1 selection matrix `P`, then one circulant multiply
//! per column. A naive row-by-row implementation doubles as the
//! correctness oracle and the benchmark baseline.

use ndarray::{Array2, ArrayView2, ShapeBuilder};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{KorobovPSet, ReorderedLattice, Transform};
use crate::spectral::{make_circulant, CirculantOperator};

/// The selection matrix `P` in `Y' = Z P`, stored as the column indices
/// `c_1, ..., c_s` (1-based): column `j` of `P` has its single 1 in row
/// `c_j`. Coinciding indices accumulate on scatter.
#[derive(Debug, Clone)]
pub struct SelectionMap {
    output_len: usize,
    indices: Vec<u64>,
}

impl SelectionMap {
    pub fn new(indices: Vec<u64>, output_len: usize) -> Result<Self> {
        for &c in &indices {
            if c == 0 || c > output_len as u64 {
                return Err(Error::IndexOutOfRange {
                    index: c as usize,
                    len: output_len + 1,
                });
            }
        }
        Ok(SelectionMap {
            output_len,
            indices,
        })
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn output_len(&self) -> usize {
        self.output_len
    }

    #[inline]
    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    /// `a' = P a`: `a'[k] = sum of a[j] over j with c_j = k + 1`.
    pub fn scatter(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.indices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.indices.len(),
                got: a.len(),
            });
        }
        let mut out = vec![0.0; self.output_len];
        for (&c, &v) in self.indices.iter().zip(a) {
            out[c as usize - 1] += v;
        }
        Ok(out)
    }
}

/// Free-function form of [`SelectionMap::scatter`].
pub fn scatter(sel: &SelectionMap, a: &[f64]) -> Result<Vec<f64>> {
    sel.scatter(a)
}

/// What to do with row 0 of the point matrix, whose point is the origin.
///
/// Bounded transforms can include it (`y_0 = (phi(0), ..., phi(0))`); the
/// inverse normal CDF cannot, so callers either drop the row (output
/// shrinks to `N - 1` rows) or substitute a finite value for `phi(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowZeroPolicy {
    Include,
    Drop,
    Substitute(f64),
}

impl RowZeroPolicy {
    /// The sensible default for a transform: include when `phi(0)` is
    /// finite, drop otherwise.
    pub fn default_for(transform: Transform) -> RowZeroPolicy {
        if transform.value_at_zero().is_some() {
            RowZeroPolicy::Include
        } else {
            RowZeroPolicy::Drop
        }
    }
}

/// A reordered lattice point matrix in factored form: the circulant built
/// from `z_k = phi({beta^k / N})` plus the selection map from the
/// exponents `c_j`. Immutable after construction; the spectrum is computed
/// once and shared by every product.
pub struct FastPointMatrix {
    lattice: ReorderedLattice,
    transform: Transform,
    circulant: CirculantOperator,
    selection: SelectionMap,
    row_zero: RowZeroPolicy,
}

impl FastPointMatrix {
    pub fn new(
        lattice: ReorderedLattice,
        transform: Transform,
        row_zero: RowZeroPolicy,
    ) -> Result<Self> {
        if row_zero == RowZeroPolicy::Include && transform.value_at_zero().is_none() {
            return Err(Error::UnboundedAtZero {
                transform: transform.name(),
            });
        }
        let n = lattice.point_count();
        let m = (n - 1) as usize;
        let table = lattice.power_table();
        let base: Vec<f64> = table
            .iter()
            .map(|&num| transform.apply_interior(num as f64 / n as f64))
            .collect();
        let circulant = make_circulant(&base)?;
        let selection = SelectionMap::new(lattice.exponents().to_vec(), m)?;
        Ok(FastPointMatrix {
            lattice,
            transform,
            circulant,
            selection,
            row_zero,
        })
    }

    #[inline]
    pub fn lattice(&self) -> &ReorderedLattice {
        &self.lattice
    }

    #[inline]
    pub fn transform(&self) -> Transform {
        self.transform
    }

    #[inline]
    pub fn row_zero(&self) -> RowZeroPolicy {
        self.row_zero
    }

    #[inline]
    pub fn circulant(&self) -> &CirculantOperator {
        &self.circulant
    }

    #[inline]
    pub fn selection(&self) -> &SelectionMap {
        &self.selection
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.lattice.dimension()
    }

    /// Number of rows a product returns: `N`, or `N - 1` when row 0 is
    /// dropped.
    #[inline]
    pub fn output_rows(&self) -> usize {
        let n = self.lattice.point_count() as usize;
        match self.row_zero {
            RowZeroPolicy::Drop => n - 1,
            _ => n,
        }
    }

    fn row_zero_value(&self, column_sum: f64) -> Option<f64> {
        match self.row_zero {
            RowZeroPolicy::Include => {
                let phi0 = self
                    .transform
                    .value_at_zero()
                    .expect("policy validated at construction");
                Some(if phi0 == 0.0 { 0.0 } else { phi0 * column_sum })
            }
            RowZeroPolicy::Substitute(v) => Some(v * column_sum),
            RowZeroPolicy::Drop => None,
        }
    }

    /// `Y a` through the factorization: one scatter, one circulant
    /// multiply, and (unless dropped) `phi(0) * sum(a)` for row 0.
    pub fn fast_matvec(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: a.len(),
            });
        }
        let scattered = self.selection.scatter(a)?;
        let tail = self.circulant.apply(&scattered)?;
        match self.row_zero_value(a.iter().sum()) {
            Some(head) => {
                let mut out = Vec::with_capacity(tail.len() + 1);
                out.push(head);
                out.extend_from_slice(&tail);
                Ok(out)
            }
            None => Ok(tail),
        }
    }

    /// `Y a` by materializing each point row and taking dot products;
    /// O(N s). The oracle and benchmark baseline for [`Self::fast_matvec`].
    pub fn naive_matvec(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: a.len(),
            });
        }
        let n = self.lattice.point_count();
        let order = n - 1;
        let exponents = self.lattice.exponents();
        let phi = self.transformed_value_table();
        let mut out = Vec::with_capacity(self.output_rows());
        if let Some(head) = self.row_zero_value(a.iter().sum()) {
            out.push(head);
        }
        for row in 1..n {
            let mut acc = 0.0;
            for (&c, &v) in exponents.iter().zip(a) {
                let num_idx = (c + order - row) % order;
                acc += phi[num_idx as usize] * v;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Table of `phi({beta^k / N})` indexed by `k`; the standard approach
    /// precomputes these N - 1 values once, same as the fast one.
    fn transformed_value_table(&self) -> Vec<f64> {
        self.circulant.base().to_vec()
    }

    /// `Y A` column by column, reusing the one cached spectrum; output is
    /// accumulated column-major so callers can stream columns.
    pub fn fast_matmat(&self, a: &ArrayView2<f64>) -> Result<Array2<f64>> {
        self.fast_matmat_opts(a, false)
    }

    pub fn fast_matmat_opts(&self, a: &ArrayView2<f64>, parallel: bool) -> Result<Array2<f64>> {
        let (rows, cols) = a.dim();
        if rows != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: rows,
            });
        }
        let columns = column_map(a, parallel, |col| self.fast_matvec(col))?;
        assemble_columns(self.output_rows(), cols, columns)
    }

    /// Row-by-row `Y A`; the standard-approach baseline, O(N s t).
    pub fn naive_matmat(&self, a: &ArrayView2<f64>) -> Result<Array2<f64>> {
        self.naive_matmat_opts(a, false)
    }

    pub fn naive_matmat_opts(&self, a: &ArrayView2<f64>, parallel: bool) -> Result<Array2<f64>> {
        let (rows, cols) = a.dim();
        if rows != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: rows,
            });
        }
        let columns = column_map(a, parallel, |col| self.naive_matvec(col))?;
        assemble_columns(self.output_rows(), cols, columns)
    }
}

impl std::fmt::Debug for FastPointMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FastPointMatrix")
            .field("n", &self.lattice.point_count())
            .field("s", &self.dimension())
            .field("transform", &self.transform)
            .field("row_zero", &self.row_zero)
            .finish()
    }
}

fn column_map<F>(a: &ArrayView2<f64>, parallel: bool, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let cols: Vec<Vec<f64>> = (0..a.ncols()).map(|k| a.column(k).to_vec()).collect();
    if parallel {
        cols.par_iter().map(|col| f(col)).collect()
    } else {
        cols.iter().map(|col| f(col)).collect()
    }
}

fn assemble_columns(rows: usize, cols: usize, columns: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let mut out = Array2::<f64>::zeros((rows, cols).f());
    for (k, col) in columns.into_iter().enumerate() {
        debug_assert_eq!(col.len(), rows);
        out.column_mut(k)
            .iter_mut()
            .zip(col)
            .for_each(|(dst, v)| *dst = v);
    }
    Ok(out)
}

/// The union-of-Korobov-lattices point matrix in factored form: one shared
/// circulant and one selection map per block `g = 1, ..., K-1`. Products
/// stack the blocks `Y'_g = Z P_g` in order of `g`.
pub struct KorobovFastMatrix {
    pset: KorobovPSet,
    transform: Transform,
    circulant: CirculantOperator,
    selections: Vec<SelectionMap>,
}

impl KorobovFastMatrix {
    pub fn new(pset: KorobovPSet, transform: Transform) -> Result<Self> {
        let k = pset.modulus().value();
        let m = (k - 1) as usize;
        let base: Vec<f64> = pset
            .power_table()
            .iter()
            .map(|&num| transform.apply_interior(num as f64 / k as f64))
            .collect();
        let circulant = make_circulant(&base)?;
        let selections = (1..k)
            .map(|g| SelectionMap::new(pset.exponents(g)?, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(KorobovFastMatrix {
            pset,
            transform,
            circulant,
            selections,
        })
    }

    #[inline]
    pub fn pset(&self) -> &KorobovPSet {
        &self.pset
    }

    #[inline]
    pub fn transform(&self) -> Transform {
        self.transform
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.pset.dimension()
    }

    #[inline]
    pub fn output_rows(&self) -> usize {
        self.pset.total_points() as usize
    }

    /// `Y a` over all `(K-1)^2` points: one scatter and circulant multiply
    /// per block, all sharing one spectrum.
    pub fn fast_matvec(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: a.len(),
            });
        }
        let mut out = Vec::with_capacity(self.output_rows());
        for sel in &self.selections {
            let tail = self.circulant.apply(&sel.scatter(a)?)?;
            out.extend_from_slice(&tail);
        }
        Ok(out)
    }

    /// Row-by-row baseline over the blocks.
    pub fn naive_matvec(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: a.len(),
            });
        }
        let k = self.pset.modulus().value();
        let order = k - 1;
        let phi = self.circulant.base();
        let mut out = Vec::with_capacity(self.output_rows());
        for sel in &self.selections {
            for n in 1..k {
                let mut acc = 0.0;
                for (&c, &v) in sel.indices().iter().zip(a) {
                    acc += phi[((c + order - n) % order) as usize] * v;
                }
                out.push(acc);
            }
        }
        Ok(out)
    }

    pub fn fast_matmat(&self, a: &ArrayView2<f64>) -> Result<Array2<f64>> {
        let (rows, cols) = a.dim();
        if rows != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: rows,
            });
        }
        let columns = column_map(a, false, |col| self.fast_matvec(col))?;
        assemble_columns(self.output_rows(), cols, columns)
    }

    pub fn naive_matmat(&self, a: &ArrayView2<f64>) -> Result<Array2<f64>> {
        let (rows, cols) = a.dim();
        if rows != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: rows,
            });
        }
        let columns = column_map(a, false, |col| self.naive_matvec(col))?;
        assemble_columns(self.output_rows(), cols, columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{reorder_lattice, GeneratingVector};
    use crate::modular::PrimeModulus;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn lattice_n7() -> ReorderedLattice {
        let gv = GeneratingVector::new(PrimeModulus::new(7).unwrap(), vec![1, 5, 3]).unwrap();
        reorder_lattice(&gv).unwrap()
    }

    fn random_lattice(rng: &mut ChaCha8Rng, n: u64, s: usize) -> ReorderedLattice {
        let modulus = PrimeModulus::new(n).unwrap();
        let comps: Vec<u64> = (0..s).map(|_| rng.random_range(1..n)).collect();
        reorder_lattice(&GeneratingVector::new(modulus, comps).unwrap()).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
    }

    #[test]
    fn scatter_worked_example() {
        let sel = SelectionMap::new(vec![1, 6, 2], 6).unwrap();
        let out = sel.scatter(&[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(out, vec![10.0, 30.0, 0.0, 0.0, 0.0, 20.0]);
    }

    #[test]
    fn scatter_accumulates_duplicates() {
        let sel = SelectionMap::new(vec![1; 5], 6).unwrap();
        let out = sel.scatter(&[1.0; 5]).unwrap();
        assert_eq!(out, vec![5.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn scatter_matches_dense_selection_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (m, s) = (13usize, 9usize);
        let indices: Vec<u64> = (0..s).map(|_| rng.random_range(1..=m as u64)).collect();
        let a: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sel = SelectionMap::new(indices.clone(), m).unwrap();
        // Dense P multiply oracle.
        let mut dense = vec![0.0f64; m];
        for (k, entry) in dense.iter_mut().enumerate() {
            for j in 0..s {
                let p = if indices[j] as usize == k + 1 {
                    1.0
                } else {
                    0.0
                };
                *entry += p * a[j];
            }
        }
        assert_eq!(sel.scatter(&a).unwrap(), dense);
    }

    #[test]
    fn scatter_rejects_bad_shapes() {
        assert!(SelectionMap::new(vec![0], 4).is_err());
        assert!(SelectionMap::new(vec![5], 4).is_err());
        let sel = SelectionMap::new(vec![1, 2], 4).unwrap();
        assert!(sel.scatter(&[1.0]).is_err());
    }

    #[test]
    fn fast_matvec_worked_example_unit_vector() {
        let fast = FastPointMatrix::new(lattice_n7(), Transform::Identity, RowZeroPolicy::Include)
            .unwrap();
        let out = fast.fast_matvec(&[1.0, 0.0, 0.0]).unwrap();
        let expected = [0.0, 1.0, 5.0, 4.0, 6.0, 2.0, 3.0].map(|k| k / 7.0);
        assert!(max_abs_diff(&out, &expected) <= 1e-12);
    }

    #[test]
    fn fast_matvec_worked_example_constant_vector() {
        let fast = FastPointMatrix::new(lattice_n7(), Transform::Identity, RowZeroPolicy::Include)
            .unwrap();
        let out = fast.fast_matvec(&[7.0, 7.0, 7.0]).unwrap();
        let expected = [0.0, 9.0, 10.0, 15.0, 12.0, 11.0, 6.0];
        assert!(max_abs_diff(&out, &expected) <= 1e-10);
    }

    #[test]
    fn fast_matvec_zero_vector() {
        let fast =
            FastPointMatrix::new(lattice_n7(), Transform::Tent, RowZeroPolicy::Include).unwrap();
        let out = fast.fast_matvec(&[0.0; 3]).unwrap();
        assert_eq!(out, vec![0.0; 7]);
    }

    #[test]
    fn naive_matches_fast_all_transforms_worked_example() {
        for transform in Transform::ALL {
            let policy = RowZeroPolicy::default_for(transform);
            let fast = FastPointMatrix::new(lattice_n7(), transform, policy).unwrap();
            let a = [0.3, -1.7, 2.2];
            let f = fast.fast_matvec(&a).unwrap();
            let n = fast.naive_matvec(&a).unwrap();
            assert_eq!(f.len(), fast.output_rows());
            assert!(
                max_abs_diff(&f, &n) <= 1e-10,
                "transform {}",
                transform.name()
            );
        }
    }

    #[test]
    fn naive_unit_vector_gives_point_column() {
        let fast = FastPointMatrix::new(lattice_n7(), Transform::Identity, RowZeroPolicy::Include)
            .unwrap();
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let col = fast.naive_matvec(&e).unwrap();
            for (n, value) in col.iter().enumerate() {
                let point = fast.lattice().point(n).unwrap();
                assert!((value - point[j]).abs() <= 1e-15);
            }
        }
    }

    /// Compensated (Neumaier) dot product: the extended-precision third
    /// route for checking the oracle itself.
    fn compensated_dot(x: &[f64], y: &[f64]) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (&a, &b) in x.iter().zip(y) {
            let term = a * b;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    #[test]
    fn oracle_cross_checked_by_compensated_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let lat = random_lattice(&mut rng, 101, 50);
        let fast =
            FastPointMatrix::new(lat.clone(), Transform::Identity, RowZeroPolicy::Include).unwrap();
        let a: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = fast.fast_matvec(&a).unwrap();
        let nv = fast.naive_matvec(&a).unwrap();
        assert!(max_abs_diff(&f, &nv) <= 1e-10);
        for n in 0..101usize {
            let point = lat.point(n).unwrap();
            let exact = compensated_dot(&point, &a);
            assert!((nv[n] - exact).abs() <= 1e-12);
            assert!((f[n] - exact).abs() <= 1e-10);
        }
    }

    #[test]
    fn fast_matmat_identity_recovers_point_matrix() {
        let fast = FastPointMatrix::new(lattice_n7(), Transform::Identity, RowZeroPolicy::Include)
            .unwrap();
        let eye = Array2::<f64>::eye(3);
        let out = fast.fast_matmat(&eye.view()).unwrap();
        assert_eq!(out.dim(), (7, 3));
        for n in 0..7 {
            let point = fast.lattice().point(n).unwrap();
            for j in 0..3 {
                assert!((out[[n, j]] - point[j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fast_matmat_matches_naive_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let lat = random_lattice(&mut rng, 29, 20);
        let fast = FastPointMatrix::new(lat, Transform::Tent, RowZeroPolicy::Include).unwrap();
        let a = Array2::from_shape_fn((20, 7), |_| rng.random_range(-1.0..1.0));
        let f = fast.fast_matmat(&a.view()).unwrap();
        let n = fast.naive_matmat(&a.view()).unwrap();
        let max = f
            .iter()
            .zip(n.iter())
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        assert!(max <= 1e-10);
    }

    #[test]
    fn fast_matmat_parallel_matches_serial() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let lat = random_lattice(&mut rng, 53, 12);
        let fast = FastPointMatrix::new(lat, Transform::ShiftHalf, RowZeroPolicy::Include).unwrap();
        let a = Array2::from_shape_fn((12, 5), |_| rng.random_range(-1.0..1.0));
        let serial = fast.fast_matmat_opts(&a.view(), false).unwrap();
        let parallel = fast.fast_matmat_opts(&a.view(), true).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn fast_matmat_single_nonzero_column() {
        let fast = FastPointMatrix::new(lattice_n7(), Transform::Identity, RowZeroPolicy::Include)
            .unwrap();
        let mut a = Array2::<f64>::zeros((3, 4));
        a[[0, 2]] = 1.0;
        a[[1, 2]] = -2.0;
        a[[2, 2]] = 0.5;
        let out = fast.fast_matmat(&a.view()).unwrap();
        for n in 0..7 {
            for k in 0..4 {
                if k != 2 {
                    assert_eq!(out[[n, k]], 0.0);
                }
            }
        }
        assert!(out.column(2).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn factorization_identity_exact_for_small_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5150);
        let primes: Vec<u64> = (3..=101).filter(|&n| crate::modular::is_prime(n)).collect();
        for n in primes {
            let s = 6usize;
            let lat = random_lattice(&mut rng, n, s);
            let fast =
                FastPointMatrix::new(lat.clone(), Transform::Identity, RowZeroPolicy::Include)
                    .unwrap();
            let m = (n - 1) as usize;
            // Dense Z . dense P, exactly: each product entry selects one
            // base entry per column.
            let base = fast.circulant().base();
            for i in 0..m {
                let point = lat.point(i + 1).unwrap();
                for (j, &c) in lat.exponents().iter().enumerate() {
                    let zp = base[(c as usize - 1 + m - i) % m];
                    assert_eq!(point[j], zp, "N={n}, row {i}, col {j}");
                }
            }
        }
    }

    #[test]
    fn factorization_identity_other_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5151);
        for transform in [
            Transform::ShiftHalf,
            Transform::Tent,
            Transform::InvNormalCdf,
        ] {
            let lat = random_lattice(&mut rng, 31, 5);
            let fast = FastPointMatrix::new(
                lat.clone(),
                transform,
                RowZeroPolicy::default_for(transform),
            )
            .unwrap();
            let m = 30usize;
            let base = fast.circulant().base();
            for i in 0..m {
                let point = lat.point(i + 1).unwrap();
                for (j, &c) in lat.exponents().iter().enumerate() {
                    let y = transform.apply(point[j]).unwrap();
                    let zp = base[(c as usize - 1 + m - i) % m];
                    assert!((y - zp).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn include_policy_rejected_for_unbounded_transform() {
        assert!(matches!(
            FastPointMatrix::new(
                lattice_n7(),
                Transform::InvNormalCdf,
                RowZeroPolicy::Include
            ),
            Err(Error::UnboundedAtZero { .. })
        ));
    }

    #[test]
    fn substitute_policy_fills_row_zero() {
        let fast = FastPointMatrix::new(
            lattice_n7(),
            Transform::InvNormalCdf,
            RowZeroPolicy::Substitute(-3.5),
        )
        .unwrap();
        let out = fast.fast_matvec(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out.len(), 7);
        assert!((out[0] - (-3.5 * 6.0)).abs() <= 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let fast = FastPointMatrix::new(lattice_n7(), Transform::Identity, RowZeroPolicy::Include)
            .unwrap();
        assert!(fast.fast_matvec(&[1.0, 2.0]).is_err());
        assert!(fast.naive_matvec(&[1.0; 4]).is_err());
        let a = Array2::<f64>::zeros((2, 2));
        assert!(fast.fast_matmat(&a.view()).is_err());
    }

    #[test]
    fn korobov_identity_matmat_recovers_points_in_block_order() {
        let pset = KorobovPSet::new(PrimeModulus::new(3).unwrap(), 2);
        let fast = KorobovFastMatrix::new(pset, Transform::Identity).unwrap();
        let eye = Array2::<f64>::eye(2);
        let out = fast.fast_matmat(&eye.view()).unwrap();
        assert_eq!(out.dim(), (4, 2));
        let mut row = 0;
        for g in 1..3u64 {
            for n in 1..3u64 {
                let point = fast.pset().point(n, g).unwrap();
                for j in 0..2 {
                    assert!((out[[row, j]] - point[j]).abs() <= 1e-12);
                }
                row += 1;
            }
        }
    }

    #[test]
    fn korobov_zero_vector() {
        let pset = KorobovPSet::new(PrimeModulus::new(7).unwrap(), 3);
        let fast = KorobovFastMatrix::new(pset, Transform::Tent).unwrap();
        let out = fast.fast_matvec(&[0.0; 3]).unwrap();
        assert_eq!(out, vec![0.0; 36]);
    }

    #[test]
    fn korobov_fast_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let pset = KorobovPSet::new(PrimeModulus::new(7).unwrap(), 3);
        let fast = KorobovFastMatrix::new(pset, Transform::Identity).unwrap();
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = fast.fast_matvec(&a).unwrap();
        let n = fast.naive_matvec(&a).unwrap();
        assert!(max_abs_diff(&f, &n) <= 1e-10);
        // And the naive route against per-point dots from the enumeration.
        for (row, val) in n.iter().enumerate() {
            let g = row as u64 / 6 + 1;
            let nn = row as u64 % 6 + 1;
            let point = fast.pset().point(nn, g).unwrap();
            let dot: f64 = point.iter().zip(&a).map(|(x, v)| x * v).sum();
            assert!((val - dot).abs() <= 1e-12);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn fast_matvec_is_linear(
            seed in 0u64..1000,
            n_idx in 0usize..4,
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let primes = [11u64, 29, 53, 101];
            let n = primes[n_idx];
            let s = 8usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lat = random_lattice(&mut rng, n, s);
            let fast = FastPointMatrix::new(lat, Transform::Tent, RowZeroPolicy::Include).unwrap();
            let a: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
            let combined: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
            let lhs = fast.fast_matvec(&combined).unwrap();
            let fa = fast.fast_matvec(&a).unwrap();
            let fb = fast.fast_matvec(&b).unwrap();
            let rhs: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| alpha * x + beta * y).collect();
            proptest::prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-10);
        }

        #[test]
        fn fast_matches_naive_random_instances(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let primes = [11u64, 13, 31, 101, 211];
            let n = primes[rng.random_range(0..primes.len())];
            let s = rng.random_range(1..40usize);
            let t_idx = rng.random_range(0..Transform::ALL.len());
            let transform = Transform::ALL[t_idx];
            let lat = random_lattice(&mut rng, n, s);
            let fast = FastPointMatrix::new(lat, transform, RowZeroPolicy::default_for(transform)).unwrap();
            let a: Vec<f64> = (0..s).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = fast.fast_matvec(&a).unwrap();
            let nv = fast.naive_matvec(&a).unwrap();
            proptest::prop_assert!(max_abs_diff(&f, &nv) <= 1e-9);
        }
    }
}
