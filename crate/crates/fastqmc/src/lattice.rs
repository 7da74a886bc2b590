//! Rank-1 lattice point sets, their primitive-root reordering, the union
//! of all Korobov lattice point sets, shared univariate transforms, and
//! component-by-component construction of generating vectors.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gauss;
use crate::modular::{self, PrimeModulus, PrimitiveRoot};

/// A generating vector `(g_1, ..., g_s)` for a rank-1 lattice with a prime
/// number of points. Every component lies in `{1, ..., N-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingVector {
    modulus: PrimeModulus,
    components: Vec<u64>,
}

impl GeneratingVector {
    pub fn new(modulus: PrimeModulus, components: Vec<u64>) -> Result<Self> {
        let n = modulus.value();
        for &g in &components {
            if g == 0 || g >= n {
                return Err(Error::InvalidArgument(format!(
                    "generating vector component {g} outside 1..={}",
                    n - 1
                )));
            }
        }
        Ok(GeneratingVector {
            modulus,
            components,
        })
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn point_count(&self) -> u64 {
        self.modulus.value()
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn components(&self) -> &[u64] {
        &self.components
    }

    /// Plain-text form: first line `N s`, second line the components.
    pub fn to_text(&self) -> String {
        let comps: Vec<String> = self.components.iter().map(|g| g.to_string()).collect();
        format!(
            "{} {}\n{}\n",
            self.modulus.value(),
            self.components.len(),
            comps.join(" ")
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty generating vector text".to_string()))?;
        let mut fields = header.split_whitespace();
        let n: u64 = fields
            .next()
            .ok_or_else(|| Error::Parse("missing N in header".to_string()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad N: {e}")))?;
        let s: usize = fields
            .next()
            .ok_or_else(|| Error::Parse("missing s in header".to_string()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad s: {e}")))?;
        if fields.next().is_some() {
            return Err(Error::Parse("trailing fields in header".to_string()));
        }
        let modulus = PrimeModulus::new(n)?;
        let body = lines.next().unwrap_or("");
        let components: Vec<u64> = body
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|e| Error::Parse(format!("bad component: {e}")))
            })
            .collect::<Result<_>>()?;
        if components.len() != s {
            return Err(Error::Parse(format!(
                "header says {s} components, found {}",
                components.len()
            )));
        }
        GeneratingVector::new(modulus, components)
    }
}

/// Numerators `n g_j mod N` of the conventional lattice point `n`.
pub fn conventional_point_numerators(gv: &GeneratingVector, n: usize) -> Result<Vec<u64>> {
    let count = gv.point_count();
    if n as u64 >= count {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: count as usize,
        });
    }
    Ok(gv
        .components
        .iter()
        .map(|&g| (n as u128 * g as u128 % count as u128) as u64)
        .collect())
}

/// Conventional lattice point `({n g_1 / N}, ..., {n g_s / N})`.
pub fn conventional_lattice_point(gv: &GeneratingVector, n: usize) -> Result<Vec<f64>> {
    let count = gv.point_count() as f64;
    Ok(conventional_point_numerators(gv, n)?
        .into_iter()
        .map(|num| num as f64 / count)
        .collect())
}

/// A rank-1 lattice reordered along powers of the primitive root: the
/// certificate is the root `beta` and the exponents `c_j` with
/// `beta^(c_j - 1) = g_j (mod N)`.
///
/// Points are generated on demand from `(beta, c_1, ..., c_s)`; nothing
/// larger than that is stored.
#[derive(Debug, Clone)]
pub struct ReorderedLattice {
    root: PrimitiveRoot,
    exponents: Vec<u64>,
}

impl ReorderedLattice {
    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.root.modulus()
    }

    #[inline]
    pub fn point_count(&self) -> u64 {
        self.root.modulus().value()
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.exponents.len()
    }

    #[inline]
    pub fn root(&self) -> &PrimitiveRoot {
        &self.root
    }

    /// The exponents `c_1, ..., c_s`, each in `{1, ..., N-1}`.
    #[inline]
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Numerators of point `n`: zero for `n = 0`, otherwise
    /// `beta^((c_j - n) mod (N-1)) mod N`.
    pub fn point_numerators(&self, n: usize) -> Result<Vec<u64>> {
        let count = self.point_count();
        if n as u64 >= count {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: count as usize,
            });
        }
        if n == 0 {
            return Ok(vec![0; self.exponents.len()]);
        }
        let order = self.root.modulus().group_order();
        Ok(self
            .exponents
            .iter()
            .map(|&c| self.root.pow((c + order - n as u64) % order))
            .collect())
    }

    /// Point `n` of the reordered set in `[0,1)^s`.
    pub fn point(&self, n: usize) -> Result<Vec<f64>> {
        let count = self.point_count() as f64;
        Ok(self
            .point_numerators(n)?
            .into_iter()
            .map(|num| num as f64 / count)
            .collect())
    }

    /// Power table `beta^k mod N` for `k = 0, ..., N-2`. O(N) memory; used
    /// by dense baselines so point materialization is a table lookup.
    pub fn power_table(&self) -> Vec<u64> {
        let n = self.point_count();
        let beta = self.root.value();
        let mut table = Vec::with_capacity(n as usize - 1);
        let mut cur = 1u64;
        for _ in 0..n - 1 {
            table.push(cur);
            cur = cur * beta % n;
        }
        table
    }
}

/// Computes the reordering certificate for a generating vector: the
/// smallest primitive root and one discrete logarithm per component.
pub fn reorder_lattice(gv: &GeneratingVector) -> Result<ReorderedLattice> {
    let root = modular::primitive_root(gv.modulus());
    let exponents = gv
        .components
        .iter()
        .map(|&g| modular::discrete_log_exponent(&root, g))
        .collect::<Result<Vec<u64>>>()?;
    Ok(ReorderedLattice { root, exponents })
}

/// The univariate map applied to every coordinate of every point.
///
/// Applying one shared map is what keeps the reordered point matrix
/// circulant-times-selection; per-coordinate maps (random shifts,
/// scrambling) would break the factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// phi(x) = x
    Identity,
    /// phi(x) = x - 1/2, mapping onto [-1/2, 1/2]
    ShiftHalf,
    /// phi(x) = 1 - |2x - 1|, the tent map
    Tent,
    /// phi(x) = inverse standard normal CDF; unbounded at 0 and 1
    InvNormalCdf,
}

impl Transform {
    pub const ALL: [Transform; 4] = [
        Transform::Identity,
        Transform::ShiftHalf,
        Transform::Tent,
        Transform::InvNormalCdf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::ShiftHalf => "shift",
            Transform::Tent => "tent",
            Transform::InvNormalCdf => "invnorm",
        }
    }

    /// phi(0) when finite; `None` for the inverse normal CDF.
    pub fn value_at_zero(self) -> Option<f64> {
        match self {
            Transform::Identity => Some(0.0),
            Transform::ShiftHalf => Some(-0.5),
            Transform::Tent => Some(0.0),
            Transform::InvNormalCdf => None,
        }
    }

    pub fn apply(self, x: f64) -> Result<f64> {
        match self {
            Transform::Identity => Ok(x),
            Transform::ShiftHalf => Ok(x - 0.5),
            Transform::Tent => Ok(1.0 - (2.0 * x - 1.0).abs()),
            Transform::InvNormalCdf => gauss::inv_normal_cdf(x),
        }
    }

    /// Infallible apply for arguments known to lie strictly inside (0,1),
    /// as every nonzero lattice coordinate does.
    #[inline]
    pub(crate) fn apply_interior(self, x: f64) -> f64 {
        debug_assert!(x > 0.0 && x < 1.0);
        match self {
            Transform::Identity => x,
            Transform::ShiftHalf => x - 0.5,
            Transform::Tent => 1.0 - (2.0 * x - 1.0).abs(),
            Transform::InvNormalCdf => gauss::inv_normal_cdf_interior(x),
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Transform::Identity),
            "shift" => Ok(Transform::ShiftHalf),
            "tent" => Ok(Transform::Tent),
            "invnorm" => Ok(Transform::InvNormalCdf),
            other => Err(Error::Parse(format!(
                "unknown transform {other:?}; expected identity|shift|tent|invnorm"
            ))),
        }
    }
}

/// Convenience free function mirroring `Transform::apply`.
pub fn apply_transform(t: Transform, x: f64) -> Result<f64> {
    t.apply(x)
}

/// The union of all Korobov lattice point sets with prime modulus `K`:
/// `(K-1)^2` points indexed by `(n, g)` with `n, g = 1, ..., K-1`.
#[derive(Debug, Clone)]
pub struct KorobovPSet {
    root: PrimitiveRoot,
    dimension: usize,
}

impl KorobovPSet {
    pub fn new(modulus: PrimeModulus, dimension: usize) -> Self {
        KorobovPSet {
            root: modular::primitive_root(modulus),
            dimension,
        }
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.root.modulus()
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    #[inline]
    pub fn root(&self) -> &PrimitiveRoot {
        &self.root
    }

    /// Total number of points, `(K-1)^2`.
    #[inline]
    pub fn total_points(&self) -> u64 {
        let m = self.root.modulus().group_order();
        m * m
    }

    fn check_block_index(&self, idx: u64) -> Result<()> {
        let order = self.root.modulus().group_order();
        if idx == 0 || idx > order {
            return Err(Error::IndexOutOfRange {
                index: idx as usize,
                len: order as usize + 1,
            });
        }
        Ok(())
    }

    /// Exponents `c_{g,j} = (j-1)(g-1) + 1 mod (K-1)` with the zero residue
    /// mapped to `K-1` (valid because the base sequence is
    /// `(K-1)`-periodic).
    pub fn exponents(&self, g: u64) -> Result<Vec<u64>> {
        self.check_block_index(g)?;
        let order = self.root.modulus().group_order();
        Ok((0..self.dimension as u64)
            .map(|jm1| {
                let c = (jm1 as u128 * (g - 1) as u128 + 1) % order as u128;
                if c == 0 {
                    order
                } else {
                    c as u64
                }
            })
            .collect())
    }

    /// Numerators of the point indexed by `(n, g)`:
    /// `beta^((c_{g,j} - n) mod (K-1)) mod K`.
    pub fn point_numerators(&self, n: u64, g: u64) -> Result<Vec<u64>> {
        self.check_block_index(n)?;
        let order = self.root.modulus().group_order();
        Ok(self
            .exponents(g)?
            .into_iter()
            .map(|c| self.root.pow((c + order - n) % order))
            .collect())
    }

    /// The point indexed by `(n, g)` in `[0,1)^s`.
    pub fn point(&self, n: u64, g: u64) -> Result<Vec<f64>> {
        let k = self.root.modulus().value() as f64;
        Ok(self
            .point_numerators(n, g)?
            .into_iter()
            .map(|num| num as f64 / k)
            .collect())
    }

    /// Power table shared with the reordered-lattice machinery.
    pub fn power_table(&self) -> Vec<u64> {
        let k = self.root.modulus().value();
        let beta = self.root.value();
        let mut table = Vec::with_capacity(k as usize - 1);
        let mut cur = 1u64;
        for _ in 0..k - 1 {
            table.push(cur);
            cur = cur * beta % k;
        }
        table
    }
}

/// Product weights `gamma_j = 1/j^2`, the construction default.
pub fn default_weights(dimension: usize) -> Vec<f64> {
    (1..=dimension).map(|j| 1.0 / (j * j) as f64).collect()
}

/// The alpha = 2 Korobov-space kernel `omega(x) = 2 pi^2 (x^2 - x + 1/6)`.
#[inline]
fn worst_case_kernel(x: f64) -> f64 {
    2.0 * std::f64::consts::PI * std::f64::consts::PI * (x * x - x + 1.0 / 6.0)
}

/// Greedy component-by-component construction of a generating vector,
/// minimizing the weighted worst-case error
/// `e^2(g) = -1 + (1/N) sum_n prod_j (1 + gamma_j omega({n g_j / N}))`.
///
/// Plain O(s N^2) search; ties are broken toward the smallest candidate
/// (within a tiny epsilon so floating roundoff cannot flip a tie).
pub fn cbc_construct(
    modulus: PrimeModulus,
    dimension: usize,
    weights: &[f64],
) -> Result<GeneratingVector> {
    let n = modulus.value();
    if dimension as u64 >= n {
        return Err(Error::InvalidArgument(format!(
            "dimension {dimension} must be smaller than the modulus {n}"
        )));
    }
    if weights.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            got: weights.len(),
        });
    }
    if weights.iter().any(|&g| g.is_nan() || g <= 0.0) {
        return Err(Error::InvalidArgument(
            "weights must be strictly positive".to_string(),
        ));
    }

    let nn = n as usize;
    let kernel: Vec<f64> = (0..nn)
        .map(|r| worst_case_kernel(r as f64 / n as f64))
        .collect();
    let mut running = vec![1.0f64; nn];
    let mut components = Vec::with_capacity(dimension);
    for &gamma in weights.iter().take(dimension) {
        let mut best_g = 0u64;
        let mut best_e2 = f64::INFINITY;
        for cand in 1..n {
            let mut sum = 0.0f64;
            let mut idx = 0usize;
            let step = cand as usize;
            for &p in &running {
                sum += p * (1.0 + gamma * kernel[idx]);
                idx += step;
                if idx >= nn {
                    idx -= nn;
                }
            }
            let e2 = sum / n as f64 - 1.0;
            let eps = 1e-12 * (1.0 + best_e2.abs());
            if best_g == 0 || e2 < best_e2 - eps {
                best_e2 = e2;
                best_g = cand;
            }
        }
        let step = best_g as usize;
        let mut idx = 0usize;
        for p in &mut running {
            *p *= 1.0 + gamma * kernel[idx];
            idx += step;
            if idx >= nn {
                idx -= nn;
            }
        }
        components.push(best_g);
    }
    GeneratingVector::new(modulus, components)
}
