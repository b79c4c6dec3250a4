//! 4-wise independent hashing `[n] -> [m]`.
//!
//! The family is degree-3 polynomials with uniform coefficients over `GF(P)`,
//! `P` the least prime `>= n`, followed by reduction mod `m`. Before the final
//! reduction the values at any 4 distinct points are independent and uniform
//! on `GF(P)`; the mod-`m` step adds a bias of order `m / P`, which
//! [`exact_collision_rate`] reports exactly.

use crate::dist::{DiscreteDistribution, Element};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourWiseHash {
    domain_n: usize,
    prime: u64,
    /// Coefficients of `c0 + c1 x + c2 x^2 + c3 x^3`.
    coefficients: [u64; 4],
    range_m: usize,
}

impl FourWiseHash {
    /// Builds a hash with explicit coefficients (reduced mod the prime).
    pub fn with_coefficients(domain_n: usize, range_m: usize, coefficients: [u64; 4]) -> Result<Self> {
        if domain_n == 0 {
            return Err(Error::InvalidDomain(0));
        }
        if range_m == 0 {
            return Err(Error::param("range_m", "must be at least 1"));
        }
        let prime = least_prime_at_least(domain_n as u64);
        Ok(Self {
            domain_n,
            prime,
            coefficients: coefficients.map(|c| c % prime),
            range_m,
        })
    }

    pub fn domain_n(&self) -> usize {
        self.domain_n
    }

    pub fn range_m(&self) -> usize {
        self.range_m
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn coefficients(&self) -> [u64; 4] {
        self.coefficients
    }

    /// Bits needed to store the four coefficients.
    pub fn representation_bits(&self) -> u64 {
        4 * ceil_log2(self.prime)
    }

    #[inline]
    fn residue(&self, x: u64) -> u64 {
        let p = self.prime as u128;
        let x = x as u128 % p;
        let [c0, c1, c2, c3] = self.coefficients.map(|c| c as u128);
        let mut acc = c3;
        acc = (acc * x + c2) % p;
        acc = (acc * x + c1) % p;
        acc = (acc * x + c0) % p;
        acc as u64
    }

    /// Bucket in `[1, range_m]` for `x` in `[1, domain_n]`.
    pub fn apply(&self, x: Element) -> Result<usize> {
        if x == 0 || x as usize > self.domain_n {
            return Err(Error::OutOfDomain {
                element: x as u64,
                n: self.domain_n,
            });
        }
        Ok(self.bucket(x))
    }

    /// [`apply`](Self::apply) without the domain check.
    #[inline]
    pub fn bucket(&self, x: Element) -> usize {
        (self.residue(x as u64) % self.range_m as u64) as usize + 1
    }
}

pub fn sample_hash(domain_n: usize, range_m: usize, rng: &mut Rng) -> Result<FourWiseHash> {
    if domain_n == 0 {
        return Err(Error::InvalidDomain(0));
    }
    let prime = least_prime_at_least(domain_n as u64);
    let coefficients = [(); 4].map(|_| rng.below(prime));
    FourWiseHash::with_coefficients(domain_n, range_m, coefficients)
}

/// Distribution of `h(X)` for `X ~ p`, over `[range_m]`.
pub fn push_forward(h: &FourWiseHash, p: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    if p.n() != h.domain_n {
        return Err(Error::DomainMismatch {
            left: p.n(),
            right: h.domain_n,
        });
    }
    let mut out = vec![0.0; h.range_m];
    for (i, &m) in p.mass().iter().enumerate() {
        out[h.bucket(i as Element + 1) - 1] += m;
    }
    DiscreteDistribution::from_weights(&out)
}

/// `Pr_h[h(x) = h(y)]` for fixed `x != y` under the double-mod family: the
/// residues are independent and uniform on `GF(prime)`, so the rate is
/// `sum_b c_b^2 / prime^2` with `c_b = #{r < prime : r mod m = b}`.
pub fn exact_collision_rate(prime: u64, range_m: u64) -> f64 {
    let q = prime / range_m;
    let r = prime % range_m;
    // r buckets hold q+1 residues, the rest hold q.
    let sum_sq = r as u128 * (q as u128 + 1).pow(2) + (range_m - r) as u128 * (q as u128).pow(2);
    sum_sq as f64 / (prime as f64 * prime as f64)
}

/// `ceil(log2(x))` for `x >= 1`; 0 for `x <= 1`.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// Least prime `>= n` (2 for `n <= 2`).
pub fn least_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    'witness: for &a in &BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn least_prime_examples() {
        assert_eq!(least_prime_at_least(10_000), 10_007);
        assert_eq!(least_prime_at_least(1), 2);
        assert_eq!(least_prime_at_least(13), 13);
        let mut rng = Rng::new(1, 0);
        assert_eq!(sample_hash(10_000, 8, &mut rng).unwrap().prime(), 10_007);
    }

    #[test]
    fn single_bucket() {
        let mut rng = Rng::new(4, 0);
        let h = sample_hash(100, 1, &mut rng).unwrap();
        assert!((1..=100).all(|x| h.apply(x).unwrap() == 1));
        let p = DiscreteDistribution::from_weights(&[1.0, 2.0, 3.0]).unwrap();
        let h3 = sample_hash(3, 1, &mut rng).unwrap();
        assert_eq!(push_forward(&h3, &p).unwrap().mass(), &[1.0]);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = sample_hash(1000, 16, &mut Rng::new(77, 5)).unwrap();
        let b = sample_hash(1000, 16, &mut Rng::new(77, 5)).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        for x in 1..=1000 {
            assert_eq!(a.apply(x).unwrap(), b.apply(x).unwrap());
        }
    }

    #[test]
    fn constant_polynomial() {
        let h = FourWiseHash::with_coefficients(50, 7, [0, 0, 0, 0]).unwrap();
        let c = 33;
        let k = FourWiseHash::with_coefficients(50, 7, [c, 0, 0, 0]).unwrap();
        let expected = (c % 53 % 7) as usize + 1;
        assert!((1..=50).all(|x| k.apply(x).unwrap() == expected));
        assert!((1..=50).all(|x| h.apply(x).unwrap() == 1));
    }

    #[test]
    fn apply_checks_domain() {
        let h = FourWiseHash::with_coefficients(10, 3, [1, 2, 3, 4]).unwrap();
        assert!(h.apply(0).is_err());
        assert!(h.apply(11).is_err());
        assert!(FourWiseHash::with_coefficients(10, 0, [0; 4]).is_err());
    }

    #[test]
    fn push_forward_sums_buckets() {
        // Find coefficients realizing {1,2,3} -> {1,1,2} by search over a tiny field.
        let p = DiscreteDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let mut found = false;
        'search: for c0 in 0..3 {
            for c1 in 0..3 {
                for c2 in 0..3 {
                    for c3 in 0..3 {
                        let h = FourWiseHash::with_coefficients(3, 2, [c0, c1, c2, c3]).unwrap();
                        if (1..=3).map(|x| h.bucket(x)).collect::<Vec<_>>() == [1, 1, 2] {
                            let img = push_forward(&h, &p).unwrap();
                            assert!((img.mass()[0] - 0.5).abs() < 1e-15);
                            assert!((img.mass()[1] - 0.5).abs() < 1e-15);
                            found = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn collision_rate_by_enumeration() {
        for (prime, m) in [(11u64, 2u64), (13, 4), (17, 5), (7, 7)] {
            let mut hits = 0u64;
            for a in 0..prime {
                for b in 0..prime {
                    if a % m == b % m {
                        hits += 1;
                    }
                }
            }
            let brute = hits as f64 / (prime * prime) as f64;
            assert!((exact_collision_rate(prime, m) - brute).abs() < 1e-15);
        }
    }

    #[test]
    fn representation_bits() {
        let h = FourWiseHash::with_coefficients(16_384, 64, [0; 4]).unwrap();
        assert_eq!(h.prime(), 16_411);
        assert_eq!(h.representation_bits(), 4 * 15);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
        assert_eq!(ceil_log2(1), 0);
    }
}
