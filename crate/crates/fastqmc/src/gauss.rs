//! Generation of normally distributed QMC point sets with a general
//! covariance: `z_n = Phi^{-1}(x_n) A + mu` with `A^T A = Sigma`.

// The quantile coefficients below are kept at their published precision.
#![allow(clippy::excessive_precision)]

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fastmv::{FastPointMatrix, RowZeroPolicy};
use crate::lattice::{ReorderedLattice, Transform};

// Wichura's PPND16 rational approximation to the inverse of the standard
// normal distribution function (Applied Statistics 37, algorithm AS 241).
// Absolute error is below 1e-15 over the full open interval.
const SPLIT1: f64 = 0.425;
const SPLIT2: f64 = 5.0;
const CONST1: f64 = 0.180625;
const CONST2: f64 = 1.6;

const A: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn poly(coeffs: &[f64; 8], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

/// Inverse normal CDF on the open interval, antisymmetric by construction:
/// the tail branch always evaluates at `min(p, 1-p)` and restores the sign.
pub(crate) fn inv_normal_cdf_interior(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= SPLIT1 {
        let r = CONST1 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let value = if r <= SPLIT2 {
        let r = r - CONST2;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - SPLIT2;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// Inverse of the standard normal distribution function.
///
/// Accepts `0 < p < 1`; the quadrature machinery resolves the endpoint
/// `p = 0` through its row-zero policy instead of producing infinities.
pub fn inv_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfDomain {
            arg: p,
            reason: "inverse normal CDF requires 0 < p < 1",
        });
    }
    Ok(inv_normal_cdf_interior(p))
}

/// Upper-triangular Cholesky factor `A` with `A^T A = Sigma`.
pub fn cholesky_upper(sigma: &Array2<f64>) -> Result<Array2<f64>> {
    let (rows, cols) = sigma.dim();
    if rows != cols {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: cols,
        });
    }
    let scale = sigma.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    for i in 0..rows {
        for j in i + 1..rows {
            if (sigma[[i, j]] - sigma[[j, i]]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut factor = Array2::<f64>::zeros((rows, rows));
    for i in 0..rows {
        let mut diag = sigma[[i, i]];
        for k in 0..i {
            diag -= factor[[k, i]] * factor[[k, i]];
        }
        if diag <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: i });
        }
        let d = diag.sqrt();
        factor[[i, i]] = d;
        for j in i + 1..rows {
            let mut v = sigma[[i, j]];
            for k in 0..i {
                v -= factor[[k, i]] * factor[[k, j]];
            }
            factor[[i, j]] = v / d;
        }
    }
    Ok(factor)
}

/// Target distribution `N(mu, A^T A)` described by its mean and an
/// upper-triangular factor with positive diagonal.
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    mean: Vec<f64>,
    factor: Array2<f64>,
}

impl GaussianSpec {
    /// Builds from an explicit upper-triangular factor.
    pub fn from_factor(mean: Vec<f64>, factor: Array2<f64>) -> Result<Self> {
        let (rows, cols) = factor.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: cols,
            });
        }
        if mean.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: mean.len(),
            });
        }
        for i in 0..rows {
            if factor[[i, i]] <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: i });
            }
            for j in 0..i {
                if factor[[i, j]] != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "factor must be upper triangular; nonzero at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(GaussianSpec { mean, factor })
    }

    /// Builds from a covariance matrix by Cholesky factorization.
    pub fn from_covariance(mean: Vec<f64>, sigma: &Array2<f64>) -> Result<Self> {
        let factor = cholesky_upper(sigma)?;
        GaussianSpec::from_factor(mean, factor)
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    #[inline]
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    #[inline]
    pub fn factor(&self) -> &Array2<f64> {
        &self.factor
    }
}

/// Generates the point set `z_n = Phi^{-1}(x_n) A + mu` over the reordered
/// lattice, using the fast matrix product for `Y A`.
///
/// With [`RowZeroPolicy::Drop`] (the default choice for this transform) the
/// output has `N - 1` rows, omitting the point at the origin; a substitute
/// policy restores all `N` rows with a caller-chosen finite stand-in for
/// `Phi^{-1}(0)`.
pub fn generate_normal(
    lattice: &ReorderedLattice,
    spec: &GaussianSpec,
    policy: RowZeroPolicy,
) -> Result<Array2<f64>> {
    if spec.dimension() != lattice.dimension() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dimension(),
            got: spec.dimension(),
        });
    }
    let fast = FastPointMatrix::new(lattice.clone(), Transform::InvNormalCdf, policy)?;
    let mut out = fast.fast_matmat(&spec.factor.view())?;
    for mut row in out.rows_mut() {
        for (v, m) in row.iter_mut().zip(&spec.mean) {
            *v += m;
        }
    }
    Ok(out)
}

/// Reference implementation: per-row `Phi^{-1}(x_n) A + mu` without the
/// circulant factorization. Shares the row-zero policy with the fast path.
pub fn generate_normal_naive(
    lattice: &ReorderedLattice,
    spec: &GaussianSpec,
    policy: RowZeroPolicy,
) -> Result<Array2<f64>> {
    if spec.dimension() != lattice.dimension() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dimension(),
            got: spec.dimension(),
        });
    }
    let fast = FastPointMatrix::new(lattice.clone(), Transform::InvNormalCdf, policy)?;
    let mut out = fast.naive_matmat(&spec.factor.view())?;
    for mut row in out.rows_mut() {
        for (v, m) in row.iter_mut().zip(&spec.mean) {
            *v += m;
        }
    }
    Ok(out)
}
