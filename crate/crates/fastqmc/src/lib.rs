//! Fast quasi-Monte Carlo matrix-vector multiplication.
//!
//! Rank-1 lattice point sets (and the union of all Korobov lattice point
//! sets) can be reordered along powers of a primitive root so that the
//! point matrix factors as a circulant matrix times a 0/1 selection
//! matrix. A product `Y a` then costs one FFT-sized convolution,
//! O(N log N), instead of the O(N s) row-by-row evaluation, and `Y A`
//! costs O(t N log N) for an s x t matrix `A` with no structure assumed.
//!
//! On top of the core multiply ([`fastmv`]) sit two applications:
//! generation of N(mu, Sigma)-distributed point sets ([`gauss`]) and fast
//! stiffness-matrix assembly for a 1D elliptic problem with parametric
//! random coefficients in both affine-uniform and log-normal form
//! ([`fem1d`]). The [`bench`] module reproduces the structure of the
//! accompanying experiments and the `fastqmc` binary exposes everything
//! on the command line.

pub mod bench;
pub mod error;
pub mod fastmv;
pub mod fem1d;
pub mod gauss;
pub mod lattice;
pub mod modular;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};

/// Which multiplication route a pipeline runs: the circulant
/// factorization or the standard row-by-row baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fast,
    Std,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fast => "fast",
            Method::Std => "std",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Method::Fast),
            "std" => Ok(Method::Std),
            other => Err(Error::Parse(format!(
                "unknown method {other:?}; expected fast|std"
            ))),
        }
    }
}
