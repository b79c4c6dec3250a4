use crate::dist::{DiscreteDistribution, Element, Sampler};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Single-pass sample source: each position is produced once, in order.
#[derive(Clone, Debug)]
pub struct SampleStream {
    sampler: Sampler,
    rng: Rng,
    drawn: u64,
    limit: Option<u64>,
}

impl SampleStream {
    pub fn new(source: &DiscreteDistribution, rng: Rng) -> Self {
        Self::from_sampler(source.sampler(), rng)
    }

    /// Shares a precomputed sampler (cheap to clone) across many streams.
    pub fn from_sampler(sampler: Sampler, rng: Rng) -> Self {
        Self {
            sampler,
            rng,
            drawn: 0,
            limit: None,
        }
    }

    /// Caps the stream at `limit` samples; reading past it fails.
    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn n(&self) -> usize {
        self.sampler.n()
    }

    pub fn drawn(&self) -> u64 {
        self.drawn
    }

    #[inline]
    pub fn next_sample(&mut self) -> Result<Element> {
        if let Some(limit) = self.limit {
            if self.drawn >= limit {
                return Err(Error::InsufficientSamples { drawn: self.drawn });
            }
        }
        self.drawn += 1;
        Ok(self.sampler.sample(&mut self.rng))
    }

    /// Reads position `pos` (0-based). Consumed positions cannot be revisited;
    /// positions ahead of the cursor are reached by discarding samples.
    pub fn read_at(&mut self, pos: u64) -> Result<Element> {
        if pos < self.drawn {
            return Err(Error::StreamRewind {
                requested: pos,
                next: self.drawn,
            });
        }
        while self.drawn < pos {
            self.next_sample()?;
        }
        self.next_sample()
    }
}
