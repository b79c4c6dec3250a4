//! Discrete distributions over `[n] = {1, ..., n}`, sampling, and the collision
//! primitives shared by every tester.
//!
//! Elements are 1-based `u32` values throughout the public API.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type Element = u32;

const SUM_TOLERANCE: f64 = 1e-12;

/// An exact probability vector over `[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    mass: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates non-negativity and that the entries sum to 1 within `1e-12`.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidDomain(0));
        }
        if let Some((i, v)) = mass
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {} is {v}",
                i + 1
            )));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { mass })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDomain(0));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Probability of element `x` (1-based).
    pub fn prob(&self, x: Element) -> f64 {
        self.mass[x as usize - 1]
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self)
    }
}

pub fn make_uniform(n: usize) -> Result<DiscreteDistribution> {
    if n == 0 {
        return Err(Error::InvalidDomain(0));
    }
    Ok(DiscreteDistribution {
        mass: vec![1.0 / n as f64; n],
    })
}

/// Paired-bin hard instance on `2 * pairs` elements together with its hidden
/// sign vector.
#[derive(Clone, Debug)]
pub struct PaninskiInstance {
    pub dist: DiscreteDistribution,
    /// `signs[i]` is the direction of the bias on pair `{2i+1, 2i+2}`.
    pub signs: Vec<i8>,
}

/// Pair `i` receives `((1 + y_i eps) / 2n, (1 - y_i eps) / 2n)` with `y_i` a
/// uniform sign drawn from `rng`.
pub fn make_paninski_instance(pairs: usize, eps: f64, rng: &mut Rng) -> Result<PaninskiInstance> {
    let signs: Vec<i8> = (0..pairs).map(|_| rng.sign()).collect();
    paninski_with_signs(eps, &signs)
}

pub fn paninski_with_signs(eps: f64, signs: &[i8]) -> Result<PaninskiInstance> {
    if signs.is_empty() {
        return Err(Error::InvalidDomain(0));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("eps", format!("{eps} is outside (0, 1]")));
    }
    let denom = 2.0 * signs.len() as f64;
    let mut mass = Vec::with_capacity(2 * signs.len());
    for &y in signs {
        let hi = (1.0 + eps) / denom;
        let lo = (1.0 - eps) / denom;
        if y >= 0 {
            mass.extend([hi, lo]);
        } else {
            mass.extend([lo, hi]);
        }
    }
    Ok(PaninskiInstance {
        dist: DiscreteDistribution::new(mass)?,
        signs: signs.to_vec(),
    })
}

/// Zipf law with exponent `s` on `[n]`: `p_i` proportional to `i^-s`.
pub fn make_zipf(n: usize, s: f64) -> Result<DiscreteDistribution> {
    if n == 0 {
        return Err(Error::InvalidDomain(0));
    }
    let w: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-s)).collect();
    DiscreteDistribution::from_weights(&w)
}

/// Uniform on the first and on the second half of `[n]` (`n` even); the two
/// have disjoint supports, so their l1 distance is 2.
pub fn make_disjoint_halves(n: usize) -> Result<(DiscreteDistribution, DiscreteDistribution)> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::param("n", format!("{n} must be even and at least 2")));
    }
    let half = n / 2;
    let v = 1.0 / half as f64;
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    p[..half].fill(v);
    q[half..].fill(v);
    Ok((DiscreteDistribution { mass: p }, DiscreteDistribution { mass: q }))
}

fn check_same_domain(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::DomainMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    Ok(())
}

/// `(sum |p_i - q_i|^k)^(1/k)`.
pub fn lp_distance(p: &DiscreteDistribution, q: &DiscreteDistribution, k: u32) -> Result<f64> {
    check_same_domain(p, q)?;
    if k == 0 {
        return Err(Error::param("k", "order must be at least 1"));
    }
    Ok(lp_of_diffs(p.mass.iter().zip(&q.mass).map(|(a, b)| a - b), k))
}

pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    Ok(lp_distance(p, q, 1)? / 2.0)
}

/// `(sum p_i^k)^(1/k)`.
pub fn lp_norm(p: &DiscreteDistribution, k: u32) -> f64 {
    assert!(k >= 1, "norm order must be at least 1");
    lp_of_diffs(p.mass.iter().copied(), k)
}

fn lp_of_diffs(values: impl Iterator<Item = f64>, k: u32) -> f64 {
    match k {
        1 => values.map(f64::abs).sum(),
        2 => values.map(|v| v * v).sum::<f64>().sqrt(),
        _ => values
            .map(|v| v.abs().powi(k as i32))
            .sum::<f64>()
            .powf(1.0 / k as f64),
    }
}

/// Inverse-CDF sampler over a precomputed cumulative table.
///
/// A guide table of `n` entries points each interval `[j/n, (j+1)/n)` at the
/// first candidate index, so a draw inspects O(1) table entries on average.
/// The result is exactly the smallest `i` with `u < cdf[i]`, the same element
/// a binary search would return.
#[derive(Clone, Debug)]
pub struct Sampler {
    cdf: Arc<[f64]>,
    guide: Arc<[u32]>,
}

impl Sampler {
    pub fn new(p: &DiscreteDistribution) -> Self {
        let n = p.n();
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &m in &p.mass {
            acc += m;
            cdf.push(acc);
        }
        // Everything from the last positive entry on must absorb rounding, but
        // trailing zero-mass elements must stay unreachable.
        let last = p.mass.iter().rposition(|&m| m > 0.0).unwrap_or(n - 1);
        for c in &mut cdf[last..] {
            *c = f64::INFINITY;
        }
        let guide = (0..n)
            .map(|j| {
                let t = j as f64 / n as f64;
                cdf.partition_point(|&c| c <= t) as u32
            })
            .collect::<Vec<_>>();
        Self {
            cdf: cdf.into(),
            guide: guide.into(),
        }
    }

    pub fn n(&self) -> usize {
        self.cdf.len()
    }

    /// One draw, as a 1-based element.
    #[inline]
    pub fn sample(&self, rng: &mut Rng) -> Element {
        let u = rng.unit();
        let start = (u * self.cdf.len() as f64) as usize;
        let mut i = self.guide[start.min(self.guide.len() - 1)] as usize;
        while self.cdf[i] <= u {
            i += 1;
        }
        i as Element + 1
    }

    /// Reference implementation by plain binary search, for tests.
    pub fn sample_by_bisection(&self, u: f64) -> Element {
        self.cdf.partition_point(|&c| c <= u) as Element + 1
    }
}

/// A multiset of samples over `[domain_n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMultiset {
    domain_n: usize,
    counts: BTreeMap<Element, u64>,
    total: u64,
}

impl SampleMultiset {
    pub fn new(domain_n: usize) -> Self {
        Self {
            domain_n,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn from_elements(domain_n: usize, elements: &[Element]) -> Result<Self> {
        let mut s = Self::new(domain_n);
        for &x in elements {
            s.insert(x)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, x: Element) -> Result<()> {
        if x == 0 || x as usize > self.domain_n {
            return Err(Error::OutOfDomain {
                element: x as u64,
                n: self.domain_n,
            });
        }
        *self.counts.entry(x).or_insert(0) += 1;
        self.total += 1;
        Ok(())
    }

    pub fn domain_n(&self) -> usize {
        self.domain_n
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn multiplicity(&self, x: Element) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn max_multiplicity(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    /// `(element, multiplicity)` pairs in increasing element order.
    pub fn iter(&self) -> impl Iterator<Item = (Element, u64)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }
}

pub fn draw(p: &DiscreteDistribution, rng: &mut Rng, count: u64) -> SampleMultiset {
    let sampler = p.sampler();
    let mut s = SampleMultiset::new(p.n());
    for _ in 0..count {
        *s.counts.entry(sampler.sample(rng)).or_insert(0) += 1;
    }
    s.total = count;
    s
}

/// `p(S) = sum_j a_j p_j` where `a_j` is the multiplicity of `j` in `S`.
pub fn multiset_mass(p: &DiscreteDistribution, s: &SampleMultiset) -> Result<f64> {
    if p.n() != s.domain_n {
        return Err(Error::DomainMismatch {
            left: p.n(),
            right: s.domain_n,
        });
    }
    Ok(s.iter().map(|(x, a)| a as f64 * p.prob(x)).sum())
}

/// `sum_j C(a_j, 2)`.
pub fn count_pairwise_collisions(s: &SampleMultiset) -> u64 {
    s.counts.values().map(|&a| a * a.saturating_sub(1) / 2).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn uniform_entries() {
        assert_eq!(make_uniform(4).unwrap().mass(), &[0.25; 4]);
        assert_eq!(make_uniform(1).unwrap().mass(), &[1.0]);
        let u3 = make_uniform(3).unwrap();
        assert!(u3.mass().iter().all(|&m| m == 1.0 / 3.0));
        assert!((u3.mass().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert_eq!(make_uniform(0), Err(Error::InvalidDomain(0)));
    }

    #[test]
    fn rejects_invalid_vectors() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::from_weights(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn paninski_fixed_signs() {
        let inst = paninski_with_signs(0.5, &[1, -1]).unwrap();
        assert_eq!(inst.dist.mass(), &[0.375, 0.125, 0.125, 0.375]);
        let u = make_uniform(4).unwrap();
        assert_eq!(lp_distance(&inst.dist, &u, 1).unwrap(), 0.5);
    }

    #[test]
    fn paninski_pairs_keep_pair_mass() {
        let mut rng = Rng::new(7, 0);
        let inst = make_paninski_instance(500, 0.25, &mut rng).unwrap();
        assert_eq!(inst.dist.n(), 1000);
        for pair in inst.dist.mass().chunks(2) {
            assert!((pair[0] + pair[1] - 1.0 / 500.0).abs() < 1e-15);
        }
        let u = make_uniform(1000).unwrap();
        assert!((lp_distance(&inst.dist, &u, 1).unwrap() - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn paninski_rejects_bad_eps() {
        let mut rng = Rng::new(1, 0);
        assert!(make_paninski_instance(4, 0.0, &mut rng).is_err());
        assert!(make_paninski_instance(4, 1.5, &mut rng).is_err());
        assert!(make_paninski_instance(4, 1.0, &mut rng).is_ok());
    }

    #[test]
    fn distances() {
        let a = dist(&[1.0, 0.0]);
        let b = dist(&[0.0, 1.0]);
        assert_eq!(lp_distance(&a, &b, 1).unwrap(), 2.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        for k in 1..5 {
            assert_eq!(lp_distance(&a, &a, k).unwrap(), 0.0);
        }
        let u3 = make_uniform(3).unwrap();
        assert_eq!(
            lp_distance(&a, &u3, 1),
            Err(Error::DomainMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn norms() {
        let n = 9;
        let u = make_uniform(n).unwrap();
        assert!((lp_norm(&u, 2) - 1.0 / (n as f64).sqrt()).abs() < 1e-15);
        assert_eq!(lp_norm(&dist(&[1.0, 0.0, 0.0]), 2), 1.0);
        let u4 = make_uniform(4).unwrap();
        assert!((lp_norm(&u4, 3) - 4f64.powf(-2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn draw_edge_cases() {
        let mut rng = Rng::new(3, 0);
        let p = dist(&[1.0, 0.0]);
        assert!(draw(&p, &mut rng, 0).is_empty());
        let s = draw(&p, &mut rng, 5);
        assert_eq!(s.multiplicity(1), 5);
        assert_eq!(s.multiplicity(2), 0);
        assert_eq!(s.total(), 5);
    }

    #[test]
    fn trailing_zero_mass_is_unreachable() {
        let p = dist(&[0.5, 0.5, 0.0, 0.0]);
        let sampler = p.sampler();
        assert_eq!(sampler.sample_by_bisection(0.999_999_999_999), 2);
        let mut rng = Rng::new(11, 0);
        for _ in 0..10_000 {
            assert!(sampler.sample(&mut rng) <= 2);
        }
    }

    #[test]
    fn guide_table_matches_bisection() {
        let mut rng = Rng::new(5, 2);
        let p = make_zipf(37, 1.0).unwrap();
        let sampler = p.sampler();
        for _ in 0..50_000 {
            let mut probe = rng.clone();
            let u = probe.unit();
            assert_eq!(sampler.sample(&mut rng), sampler.sample_by_bisection(u));
        }
    }

    #[test]
    fn draw_is_reproducible() {
        let p = make_zipf(50, 1.0).unwrap();
        let a = draw(&p, &mut Rng::new(8, 1), 1000);
        let b = draw(&p, &mut Rng::new(8, 1), 1000);
        assert_eq!(a, b);
    }

    #[test]
    fn multiset_mass_examples() {
        let u = make_uniform(4).unwrap();
        let s = SampleMultiset::from_elements(4, &[1, 1, 2]).unwrap();
        assert_eq!(multiset_mass(&u, &s).unwrap(), 0.75);
        assert_eq!(multiset_mass(&u, &SampleMultiset::new(4)).unwrap(), 0.0);
        let u3 = make_uniform(3).unwrap();
        assert!(multiset_mass(&u3, &s).is_err());
    }

    #[test]
    fn multiset_rejects_out_of_domain() {
        let mut s = SampleMultiset::new(3);
        assert!(s.insert(0).is_err());
        assert!(s.insert(4).is_err());
        assert!(s.insert(3).is_ok());
    }

    #[test]
    fn collision_counts() {
        let s = SampleMultiset::from_elements(10, &[3, 3, 3, 5]).unwrap();
        assert_eq!(count_pairwise_collisions(&s), 3);
        let d = SampleMultiset::from_elements(10, &[1, 2, 3, 4]).unwrap();
        assert_eq!(count_pairwise_collisions(&d), 0);
        let ell = 17;
        let single = SampleMultiset::from_elements(10, &vec![4; ell]).unwrap();
        assert_eq!(count_pairwise_collisions(&single), (ell * (ell - 1) / 2) as u64);
    }

    #[test]
    fn disjoint_halves_are_far() {
        let (p, q) = make_disjoint_halves(8).unwrap();
        assert_eq!(lp_distance(&p, &q, 1).unwrap(), 2.0);
        assert!(make_disjoint_halves(7).is_err());
    }
}
