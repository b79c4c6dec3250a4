//! Reproducible random streams.
//!
//! Each [`Rng`] is a ChaCha8 keystream keyed by a 64-bit seed and addressed by
//! a 64-bit stream id (the ChaCha nonce). Two generators with different
//! stream ids never share keystream blocks, so parallel trials can each own a
//! stream without coordination.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform double in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.inner.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform integer in `[0, bound)`. `bound` must be positive.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.inner.random_range(0..bound)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// `+1` or `-1` with equal probability.
    #[inline]
    pub fn sign(&mut self) -> i8 {
        if self.inner.next_u64() >> 63 == 0 {
            1
        } else {
            -1
        }
    }

    /// Poisson-distributed count with mean `lambda` (0 when `lambda <= 0`).
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        let d = Poisson::new(lambda).expect("finite positive intensity");
        let x: f64 = d.sample(&mut self.inner);
        x as u64
    }
}

/// Stream id for the `purpose`-th independent stream of trial `trial`.
///
/// Purposes occupy the low 8 bits, so up to 256 streams per trial.
pub fn trial_stream(trial: u64, purpose: u8) -> u64 {
    (trial << 8) | purpose as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_reproduce() {
        let mut a = Rng::new(42, 3);
        let mut b = Rng::new(42, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_streams_diverge() {
        let mut a = Rng::new(42, 3);
        let mut b = Rng::new(42, 4);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        // Pearson correlation of paired uniforms; |r| ~ N(0, 1/sqrt(k)).
        let k = 200_000;
        let mut a = Rng::new(9, 0);
        let mut b = Rng::new(9, 1);
        let (mut sx, mut sy, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..k {
            let x = a.unit();
            let y = b.unit();
            sx += x;
            sy += y;
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        let kf = k as f64;
        let cov = sxy / kf - (sx / kf) * (sy / kf);
        let r = cov / ((sxx / kf - (sx / kf).powi(2)) * (syy / kf - (sy / kf).powi(2))).sqrt();
        assert!(r.abs() < 5.0 / kf.sqrt(), "correlation {r}");
    }

    #[test]
    fn unit_in_range() {
        let mut r = Rng::new(1, 1);
        for _ in 0..10_000 {
            let u = r.unit();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn poisson_mean() {
        let mut r = Rng::new(5, 0);
        let k = 20_000;
        let lambda = 7.5;
        let total: u64 = (0..k).map(|_| r.poisson(lambda)).sum();
        let mean = total as f64 / k as f64;
        let se = (lambda / k as f64).sqrt();
        assert!((mean - lambda).abs() < 5.0 * se, "mean {mean}");
        assert_eq!(r.poisson(0.0), 0);
    }

    #[test]
    fn trial_streams_do_not_collide() {
        assert_ne!(trial_stream(1, 0), trial_stream(0, 1));
        assert_eq!(trial_stream(2, 5), 2 * 256 + 5);
    }
}
