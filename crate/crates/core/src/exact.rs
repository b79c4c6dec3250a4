//! Exact-rational distributions, used where float rounding would make an
//! equality assertion meaningless (l1 preservation under flattening, the
//! l1 distance of the paired-bin instance).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::flatten::Flattener;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    mass: Vec<BigRational>,
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl ExactDistribution {
    /// Entries must be non-negative and sum to exactly 1.
    pub fn new(mass: Vec<BigRational>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidDomain(0));
        }
        if mass.iter().any(|m| m.is_negative()) {
            return Err(Error::InvalidDistribution("negative entry".into()));
        }
        let sum: BigRational = mass.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { mass })
    }

    /// Normalizes positive integer weights.
    pub fn from_weights(weights: &[u64]) -> Result<Self> {
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(
            weights
                .iter()
                .map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total)))
                .collect(),
        )
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDomain(0));
        }
        Ok(Self {
            mass: vec![ratio(1, n as i64); n],
        })
    }

    /// Paired-bin instance with an exact rational bias.
    pub fn paninski(eps: &BigRational, signs: &[i8]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidDomain(0));
        }
        if !eps.is_positive() || *eps > BigRational::one() {
            return Err(Error::param("eps", format!("{eps} is outside (0, 1]")));
        }
        let denom = BigRational::from_integer(BigInt::from(2 * signs.len()));
        let hi = (BigRational::one() + eps) / &denom;
        let lo = (BigRational::one() - eps) / &denom;
        let mut mass = Vec::with_capacity(2 * signs.len());
        for &y in signs {
            if y >= 0 {
                mass.extend([hi.clone(), lo.clone()]);
            } else {
                mass.extend([lo.clone(), hi.clone()]);
            }
        }
        Ok(Self { mass })
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[BigRational] {
        &self.mass
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.mass.iter().map(|m| m.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Splits bin `i` into `split_counts[i]` equal sub-bins.
    pub fn flatten(&self, f: &Flattener) -> Result<Self> {
        if f.original_n() != self.n() {
            return Err(Error::DomainMismatch {
                left: self.n(),
                right: f.original_n(),
            });
        }
        let mut out = Vec::with_capacity(f.new_n());
        for (m, &k) in self.mass.iter().zip(f.split_counts()) {
            let part = m / BigRational::from_integer(BigInt::from(k));
            out.extend(std::iter::repeat_n(part, k as usize));
        }
        Ok(Self { mass: out })
    }
}

pub fn l1_distance_exact(p: &ExactDistribution, q: &ExactDistribution) -> Result<BigRational> {
    if p.n() != q.n() {
        return Err(Error::DomainMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    Ok(p.mass
        .iter()
        .zip(&q.mass)
        .map(|(a, b)| (a - b).abs())
        .fold(BigRational::zero(), |acc, d| acc + d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paninski_l1_is_exactly_eps() {
        let eps = ratio(1, 3);
        let signs = [1, -1, -1, 1, 1];
        let p = ExactDistribution::paninski(&eps, &signs).unwrap();
        let u = ExactDistribution::uniform(10).unwrap();
        assert_eq!(l1_distance_exact(&p, &u).unwrap(), eps);
    }

    #[test]
    fn rejects_non_normalized() {
        assert!(ExactDistribution::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(ExactDistribution::from_weights(&[0, 0]).is_err());
    }
}
