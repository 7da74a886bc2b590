//! C ABI over the fastqmc library.
//!
//! Conventions: every fallible call returns a [`FastqmcStatus`] and
//! writes its result through out-pointers; handles are opaque and must
//! be released with the matching `_free` function; buffers are caller
//! allocated with lengths passed explicitly; matrices are row-major.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use fastqmc::fastmv::{FastPointMatrix, RowZeroPolicy};
use fastqmc::lattice::{
    cbc_construct, default_weights, reorder_lattice, GeneratingVector, ReorderedLattice, Transform,
};
use fastqmc::modular::PrimeModulus;
use fastqmc::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastqmcStatus {
    Ok = 0,
    NullPointer = 1,
    NotPrime = 2,
    InvalidArgument = 3,
    DimensionMismatch = 4,
    IndexOutOfRange = 5,
    EndpointPolicy = 6,
    NumericalFailure = 7,
}

/// The univariate transform applied to every coordinate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastqmcTransform {
    Identity = 0,
    ShiftHalf = 1,
    Tent = 2,
    InvNormalCdf = 3,
}

/// Handling of the point at the origin (row 0 of the point matrix).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastqmcRowZero {
    /// Keep row 0; rejected for transforms unbounded at zero.
    Include = 0,
    /// Omit row 0; outputs have N - 1 rows.
    Drop = 1,
    /// Keep row 0, replacing the transform value at zero by `substitute`.
    Substitute = 2,
}

/// A reordered rank-1 lattice (opaque).
pub struct FastqmcLattice {
    inner: ReorderedLattice,
}

/// A point matrix in factored form with a cached spectrum (opaque).
pub struct FastqmcMatrix {
    inner: FastPointMatrix,
}

fn status_of(err: &Error) -> FastqmcStatus {
    match err {
        Error::NotPrime(_) => FastqmcStatus::NotPrime,
        Error::DimensionMismatch { .. } => FastqmcStatus::DimensionMismatch,
        Error::IndexOutOfRange { .. } => FastqmcStatus::IndexOutOfRange,
        Error::UnboundedAtZero { .. } => FastqmcStatus::EndpointPolicy,
        Error::OutOfDomain { .. } => FastqmcStatus::InvalidArgument,
        Error::ZeroPivot { .. } | Error::NotPositiveDefinite { .. } => {
            FastqmcStatus::NumericalFailure
        }
        _ => FastqmcStatus::InvalidArgument,
    }
}

fn transform_of(t: FastqmcTransform) -> Transform {
    match t {
        FastqmcTransform::Identity => Transform::Identity,
        FastqmcTransform::ShiftHalf => Transform::ShiftHalf,
        FastqmcTransform::Tent => Transform::Tent,
        FastqmcTransform::InvNormalCdf => Transform::InvNormalCdf,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn fastqmc_status_message(status: FastqmcStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        FastqmcStatus::Ok => b"ok\0",
        FastqmcStatus::NullPointer => b"null pointer argument\0",
        FastqmcStatus::NotPrime => b"point count must be prime and at least 3\0",
        FastqmcStatus::InvalidArgument => b"invalid argument\0",
        FastqmcStatus::DimensionMismatch => b"dimension mismatch\0",
        FastqmcStatus::IndexOutOfRange => b"index out of range\0",
        FastqmcStatus::EndpointPolicy => {
            b"transform unbounded at zero; use drop or substitute row policy\0"
        }
        FastqmcStatus::NumericalFailure => b"numerical failure\0",
    };
    msg.as_ptr() as *const c_char
}

/// Builds a reordered lattice from an explicit generating vector of
/// `len` components for a prime `n`.
///
/// # Safety
/// `components` must point to `len` readable u64 values and `out` must
/// be a valid location for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_lattice_from_gvec(
    n: u64,
    components: *const u64,
    len: usize,
    out: *mut *mut FastqmcLattice,
) -> FastqmcStatus {
    if out.is_null() || (components.is_null() && len > 0) {
        return FastqmcStatus::NullPointer;
    }
    let comps = if len == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(components, len).to_vec()
    };
    let built = (|| -> fastqmc::Result<ReorderedLattice> {
        let modulus = PrimeModulus::new(n)?;
        reorder_lattice(&GeneratingVector::new(modulus, comps)?)
    })();
    match built {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(FastqmcLattice { inner }));
            FastqmcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Builds a reordered lattice from a component-by-component constructed
/// generating vector with the default weights `1/j^2`; for `s >= n` the
/// leading components repeat cyclically.
///
/// # Safety
/// `out` must be a valid location for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_lattice_cbc(
    n: u64,
    s: usize,
    out: *mut *mut FastqmcLattice,
) -> FastqmcStatus {
    if out.is_null() {
        return FastqmcStatus::NullPointer;
    }
    let built = catch_unwind(|| -> fastqmc::Result<ReorderedLattice> {
        let modulus = PrimeModulus::new(n)?;
        let d = s.min(n as usize - 1);
        if d == 0 {
            return reorder_lattice(&GeneratingVector::new(modulus, vec![])?);
        }
        let base = cbc_construct(modulus, d, &default_weights(d))?;
        let comps: Vec<u64> = (0..s).map(|j| base.components()[j % d]).collect();
        reorder_lattice(&GeneratingVector::new(modulus, comps)?)
    });
    match built {
        Ok(Ok(inner)) => {
            *out = Box::into_raw(Box::new(FastqmcLattice { inner }));
            FastqmcStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => FastqmcStatus::NumericalFailure,
    }
}

/// Releases a lattice handle. Passing NULL is a no-op.
///
/// # Safety
/// `lattice` must come from a fastqmc constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_lattice_free(lattice: *mut FastqmcLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Number of points N (including the point at the origin).
///
/// # Safety
/// `lattice` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_lattice_point_count(lattice: *const FastqmcLattice) -> u64 {
    if lattice.is_null() {
        return 0;
    }
    (*lattice).inner.point_count()
}

/// Dimension s of the lattice.
///
/// # Safety
/// `lattice` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_lattice_dimension(lattice: *const FastqmcLattice) -> usize {
    if lattice.is_null() {
        return 0;
    }
    (*lattice).inner.dimension()
}

/// Writes point `index` (untransformed, in [0,1)^s) into `out[0..s]`.
///
/// # Safety
/// `out` must point to at least `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_lattice_point(
    lattice: *const FastqmcLattice,
    index: u64,
    out: *mut f64,
    out_len: usize,
) -> FastqmcStatus {
    if lattice.is_null() || out.is_null() {
        return FastqmcStatus::NullPointer;
    }
    let lat = &(*lattice).inner;
    if out_len < lat.dimension() {
        return FastqmcStatus::DimensionMismatch;
    }
    match lat.point(index as usize) {
        Ok(point) => {
            std::ptr::copy_nonoverlapping(point.as_ptr(), out, point.len());
            FastqmcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Builds the factored point matrix for a lattice and transform. The
/// `substitute` value is only read for the Substitute row policy.
///
/// # Safety
/// `lattice` must be a live handle; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_matrix_new(
    lattice: *const FastqmcLattice,
    transform: FastqmcTransform,
    row_zero: FastqmcRowZero,
    substitute: f64,
    out: *mut *mut FastqmcMatrix,
) -> FastqmcStatus {
    if lattice.is_null() || out.is_null() {
        return FastqmcStatus::NullPointer;
    }
    let policy = match row_zero {
        FastqmcRowZero::Include => RowZeroPolicy::Include,
        FastqmcRowZero::Drop => RowZeroPolicy::Drop,
        FastqmcRowZero::Substitute => {
            if !substitute.is_finite() {
                return FastqmcStatus::InvalidArgument;
            }
            RowZeroPolicy::Substitute(substitute)
        }
    };
    let lat = (*lattice).inner.clone();
    match catch_unwind(|| FastPointMatrix::new(lat, transform_of(transform), policy)) {
        Ok(Ok(inner)) => {
            *out = Box::into_raw(Box::new(FastqmcMatrix { inner }));
            FastqmcStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => FastqmcStatus::NumericalFailure,
    }
}

/// Releases a matrix handle. Passing NULL is a no-op.
///
/// # Safety
/// `matrix` must come from `fastqmc_matrix_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_matrix_free(matrix: *mut FastqmcMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Rows a product writes: N, or N - 1 under the Drop policy.
///
/// # Safety
/// `matrix` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_matrix_output_rows(matrix: *const FastqmcMatrix) -> usize {
    if matrix.is_null() {
        return 0;
    }
    (*matrix).inner.output_rows()
}

unsafe fn matvec_impl(
    matrix: *const FastqmcMatrix,
    a: *const f64,
    a_len: usize,
    out: *mut f64,
    out_len: usize,
    naive: bool,
) -> FastqmcStatus {
    if matrix.is_null() || (a.is_null() && a_len > 0) || out.is_null() {
        return FastqmcStatus::NullPointer;
    }
    let fast = &(*matrix).inner;
    if out_len < fast.output_rows() {
        return FastqmcStatus::DimensionMismatch;
    }
    let input = if a_len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(a, a_len)
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        if naive {
            fast.naive_matvec(input)
        } else {
            fast.fast_matvec(input)
        }
    }));
    match result {
        Ok(Ok(v)) => {
            std::ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
            FastqmcStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => FastqmcStatus::NumericalFailure,
    }
}

/// `Y a` through the circulant factorization, O(N log N). Writes
/// `fastqmc_matrix_output_rows` doubles into `out`.
///
/// # Safety
/// `a` must hold `a_len` doubles and `out` at least `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_matrix_matvec(
    matrix: *const FastqmcMatrix,
    a: *const f64,
    a_len: usize,
    out: *mut f64,
    out_len: usize,
) -> FastqmcStatus {
    matvec_impl(matrix, a, a_len, out, out_len, false)
}

/// Reference row-by-row `Y a`, O(N s); same contract as the fast call.
///
/// # Safety
/// As for `fastqmc_matrix_matvec`.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_matrix_matvec_naive(
    matrix: *const FastqmcMatrix,
    a: *const f64,
    a_len: usize,
    out: *mut f64,
    out_len: usize,
) -> FastqmcStatus {
    matvec_impl(matrix, a, a_len, out, out_len, true)
}

/// `Y A` for a row-major s x t matrix `a`; writes a row-major
/// (output rows) x t matrix into `out`. One cached spectrum is reused
/// across the t columns.
///
/// # Safety
/// `a` must hold `s * t` doubles and `out` at least
/// `fastqmc_matrix_output_rows(matrix) * t` doubles.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_matrix_matmat(
    matrix: *const FastqmcMatrix,
    a: *const f64,
    s: usize,
    t: usize,
    out: *mut f64,
    out_len: usize,
) -> FastqmcStatus {
    if matrix.is_null() || (a.is_null() && s * t > 0) || out.is_null() {
        return FastqmcStatus::NullPointer;
    }
    let fast = &(*matrix).inner;
    let rows = fast.output_rows();
    if out_len < rows * t {
        return FastqmcStatus::DimensionMismatch;
    }
    let data = if s * t == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(a, s * t)
    };
    let result = catch_unwind(AssertUnwindSafe(|| -> fastqmc::Result<Vec<f64>> {
        let input = ndarray::ArrayView2::from_shape((s, t), data).map_err(|_| {
            Error::DimensionMismatch {
                expected: s * t,
                got: data.len(),
            }
        })?;
        let product = fast.fast_matmat(&input)?;
        let mut flat = Vec::with_capacity(rows * t);
        for row in product.rows() {
            flat.extend(row.iter().copied());
        }
        Ok(flat)
    }));
    match result {
        Ok(Ok(flat)) => {
            std::ptr::copy_nonoverlapping(flat.as_ptr(), out, flat.len());
            FastqmcStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => FastqmcStatus::NumericalFailure,
    }
}

/// Inverse standard normal CDF; rejects arguments outside (0, 1).
///
/// # Safety
/// `out` must be a valid location for one double.
#[no_mangle]
pub unsafe extern "C" fn fastqmc_inv_normal_cdf(p: f64, out: *mut f64) -> FastqmcStatus {
    if out.is_null() {
        return FastqmcStatus::NullPointer;
    }
    match fastqmc::gauss::inv_normal_cdf(p) {
        Ok(v) => {
            *out = v;
            FastqmcStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
