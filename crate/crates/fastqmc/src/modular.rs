//! Modular arithmetic and number theory for the point-set reordering:
//! primality testing, primitive roots, discrete logarithms and modular
//! inverses over prime moduli.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A prime modulus `N >= 3` for lattice point sets.
///
/// Construction verifies primality, so downstream code can rely on
/// `Z_N^*` being cyclic of order `N - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 || !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        Ok(PrimeModulus(n))
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    /// Order of the multiplicative group, `N - 1`.
    #[inline]
    pub fn group_order(self) -> u64 {
        self.0 - 1
    }
}

impl std::fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A generator of the cyclic group `Z_N^*`, together with its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimitiveRoot {
    modulus: PrimeModulus,
    value: u64,
    inverse: u64,
}

impl PrimitiveRoot {
    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn inverse(&self) -> u64 {
        self.inverse
    }

    /// `value^k mod N` for `k` reduced mod the group order.
    #[inline]
    pub fn pow(&self, k: u64) -> u64 {
        pow_mod_unchecked(
            self.value,
            k % self.modulus.group_order(),
            self.modulus.value(),
        )
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn pow_mod_unchecked(base: u64, mut exponent: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    let mut base = base % n;
    while exponent > 0 {
        if exponent & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exponent >>= 1;
    }
    acc
}

/// `base^exponent mod n` by square-and-multiply with 128-bit intermediates.
pub fn pow_mod(base: u64, exponent: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidModulus(n));
    }
    Ok(pow_mod_unchecked(base, exponent, n))
}

/// Deterministic primality test: trial division for small inputs, then
/// Miller-Rabin with a witness set exact for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    // n > 37 and odd. Write n - 1 = d * 2^r.
    let mut d = n - 1;
    let mut r = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_unchecked(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division. Adequate for the supported
/// modulus range (N - 1 with N below 2^31).
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut factors = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            factors.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

/// The smallest primitive root of `Z_N^*`, with its multiplicative inverse.
///
/// Fixing the smallest root makes point orderings reproducible across runs.
pub fn primitive_root(n: PrimeModulus) -> PrimitiveRoot {
    let modulus = n.value();
    let order = n.group_order();
    let factors = prime_factors(order);
    let mut beta = 2u64;
    loop {
        let is_generator = factors
            .iter()
            .all(|&q| pow_mod_unchecked(beta, order / q, modulus) != 1);
        if is_generator {
            let inverse = pow_mod_unchecked(beta, order - 1, modulus);
            return PrimitiveRoot {
                modulus: n,
                value: beta,
                inverse,
            };
        }
        beta += 1;
        debug_assert!(beta < modulus, "no primitive root found below the modulus");
    }
}

/// The unique exponent `c` in `{1, ..., N-1}` with `beta^(c-1) = g (mod N)`,
/// found by baby-step giant-step in O(sqrt N) time and space.
pub fn discrete_log_exponent(root: &PrimitiveRoot, g: u64) -> Result<u64> {
    let n = root.modulus().value();
    let g = g % n;
    if g == 0 {
        return Err(Error::ZeroResidue { modulus: n });
    }
    let order = root.modulus().group_order();
    let m = (order as f64).sqrt().ceil() as u64;
    // Baby steps: beta^j -> j for j in 0..m.
    let mut table = HashMap::with_capacity(m as usize);
    let mut cur = 1u64;
    for j in 0..m {
        table.entry(cur).or_insert(j);
        cur = mul_mod(cur, root.value(), n);
    }
    // Giant steps: g * (beta^-m)^i.
    let stride = pow_mod_unchecked(root.inverse(), m, n);
    let mut gamma = g;
    for i in 0..=m {
        if let Some(&j) = table.get(&gamma) {
            let exponent = (i * m + j) % order;
            return Ok(exponent + 1);
        }
        gamma = mul_mod(gamma, stride, n);
    }
    unreachable!("baby-step giant-step covers the whole group for a primitive root")
}

/// Multiplicative inverse of `a` modulo the prime `n` (Fermat).
pub fn mod_inverse(a: u64, n: PrimeModulus) -> Result<u64> {
    let modulus = n.value();
    let a = a % modulus;
    if a == 0 {
        return Err(Error::ZeroResidue { modulus });
    }
    Ok(pow_mod_unchecked(a, modulus - 2, modulus))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_mod_worked_example() {
        // g_2 = 5 = 3^(6-1) mod 7
        assert_eq!(pow_mod(3, 5, 7).unwrap(), 5);
    }

    #[test]
    fn pow_mod_zero_exponent() {
        for x in [1u64, 2, 6, 10] {
            assert_eq!(pow_mod(x, 0, 7).unwrap(), 1);
        }
    }

    #[test]
    fn pow_mod_against_repeated_multiplication() {
        // Oracle: repeated multiplication.
        let mut acc = 1u64;
        for _ in 0..10 {
            acc = acc * 2 % 1021;
        }
        assert_eq!(acc, 3);
        assert_eq!(pow_mod(2, 10, 1021).unwrap(), 3);
    }

    #[test]
    fn pow_mod_rejects_tiny_modulus() {
        assert_eq!(pow_mod(2, 3, 1), Err(Error::InvalidModulus(1)));
        assert_eq!(pow_mod(2, 3, 0), Err(Error::InvalidModulus(0)));
    }

    #[test]
    fn is_prime_examples() {
        assert!(is_prime(7));
        assert!(!is_prime(1));
        assert!(is_prime(16001));
        assert!(is_prime(2));
        assert!(!is_prime(0));
        assert!(!is_prime(16001 * 3));
    }

    #[test]
    fn is_prime_against_trial_division() {
        fn trial(n: u64) -> bool {
            if n < 2 {
                return false;
            }
            let mut d = 2;
            while d * d <= n {
                if n.is_multiple_of(d) {
                    return false;
                }
                d += 1;
            }
            true
        }
        for n in 0..2000 {
            assert_eq!(is_prime(n), trial(n), "disagreement at {n}");
        }
        for n in [16001u64, 32003, 64007, 127997, 256019, 512009, 1 << 31] {
            assert_eq!(is_prime(n), trial(n), "disagreement at {n}");
        }
    }

    #[test]
    fn primitive_root_worked_example() {
        let n = PrimeModulus::new(7).unwrap();
        let root = primitive_root(n);
        assert_eq!(root.value(), 3);
        assert_eq!(root.inverse(), 5);
    }

    #[test]
    fn primitive_root_smallest_cases() {
        let root3 = primitive_root(PrimeModulus::new(3).unwrap());
        assert_eq!(root3.value(), 2);
        assert_eq!(root3.inverse(), 2);
        // Oracle: exhaustive order check for N = 13.
        let n = 13u64;
        let mut smallest = None;
        'cand: for beta in 2..n {
            let mut seen = vec![false; n as usize];
            let mut cur = 1u64;
            for _ in 0..n - 1 {
                cur = cur * beta % n;
                if seen[cur as usize] {
                    continue 'cand;
                }
                seen[cur as usize] = true;
            }
            smallest = Some(beta);
            break;
        }
        assert_eq!(smallest, Some(2));
        assert_eq!(primitive_root(PrimeModulus::new(13).unwrap()).value(), 2);
    }

    /// Trial-division factorization, independent of the library's internals.
    fn oracle_factors(mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                out.push(p);
                while n.is_multiple_of(p) {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            out.push(n);
        }
        out
    }

    fn primes_up_to(limit: u64) -> Vec<u64> {
        (3..=limit).filter(|&n| is_prime(n)).collect()
    }

    #[test]
    fn primitive_root_order_property_on_grid() {
        let mut grid = primes_up_to(200);
        grid.extend([1021, 16001]);
        for n in grid {
            let modulus = PrimeModulus::new(n).unwrap();
            let root = primitive_root(modulus);
            let order = n - 1;
            assert_eq!(pow_mod(root.value(), order, n).unwrap(), 1, "N={n}");
            for q in oracle_factors(order) {
                assert_ne!(
                    pow_mod(root.value(), order / q, n).unwrap(),
                    1,
                    "N={n}, q={q}"
                );
            }
            // beta * beta^-1 = 1
            assert_eq!(root.value() as u128 * root.inverse() as u128 % n as u128, 1);
        }
    }

    #[test]
    fn inverse_of_root_is_also_primitive() {
        for n in [7u64, 13, 101, 1021] {
            let modulus = PrimeModulus::new(n).unwrap();
            let root = primitive_root(modulus);
            let order = n - 1;
            for q in oracle_factors(order) {
                assert_ne!(pow_mod(root.inverse(), order / q, n).unwrap(), 1);
            }
        }
    }

    #[test]
    fn discrete_log_worked_example() {
        let n = PrimeModulus::new(7).unwrap();
        let root = primitive_root(n);
        assert_eq!(discrete_log_exponent(&root, 1).unwrap(), 1);
        assert_eq!(discrete_log_exponent(&root, 5).unwrap(), 6);
        assert_eq!(discrete_log_exponent(&root, 3).unwrap(), 2);
    }

    #[test]
    fn discrete_log_of_root_is_two() {
        for n in [5u64, 13, 127, 1021, 16001] {
            let modulus = PrimeModulus::new(n).unwrap();
            let root = primitive_root(modulus);
            assert_eq!(discrete_log_exponent(&root, root.value()).unwrap(), 2);
        }
    }

    #[test]
    fn discrete_log_inverts_pow_mod() {
        for n in [7u64, 13, 101, 1021] {
            let modulus = PrimeModulus::new(n).unwrap();
            let root = primitive_root(modulus);
            for g in 1..n {
                let c = discrete_log_exponent(&root, g).unwrap();
                assert!((1..=n - 1).contains(&c));
                assert_eq!(pow_mod(root.value(), c - 1, n).unwrap(), g, "N={n}, g={g}");
            }
        }
    }

    #[test]
    fn discrete_log_rejects_zero() {
        let n = PrimeModulus::new(7).unwrap();
        let root = primitive_root(n);
        assert!(matches!(
            discrete_log_exponent(&root, 0),
            Err(Error::ZeroResidue { .. })
        ));
        assert!(matches!(
            discrete_log_exponent(&root, 14),
            Err(Error::ZeroResidue { .. })
        ));
    }

    #[test]
    fn mod_inverse_examples() {
        let n7 = PrimeModulus::new(7).unwrap();
        assert_eq!(mod_inverse(3, n7).unwrap(), 5);
        assert_eq!(mod_inverse(1, n7).unwrap(), 1);
        // Oracle: exhaustive search.
        let n13 = PrimeModulus::new(13).unwrap();
        let b = (1..13).find(|&b| 5 * b % 13 == 1).unwrap();
        assert_eq!(b, 8);
        assert_eq!(mod_inverse(5, n13).unwrap(), 8);
        assert!(matches!(
            mod_inverse(0, n13),
            Err(Error::ZeroResidue { .. })
        ));
    }

    #[test]
    fn prime_modulus_rejects_composites_and_two() {
        assert!(PrimeModulus::new(9).is_err());
        assert!(PrimeModulus::new(2).is_err());
        assert!(PrimeModulus::new(3).is_ok());
    }
}
