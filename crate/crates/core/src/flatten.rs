//! Split distributions ("flattening").
//!
//! Bin `i` is split into `a_i` equal sub-bins, where `a_i` is one more than
//! the number of times `i` occurs in a set of flattening samples. l1
//! distances are unchanged, while heavy bins get spread out, which lowers the
//! l2 norm. Sub-bins of element `i` occupy the contiguous 1-based range
//! `offsets[i-1] + 1 ..= offsets[i]`.

use crate::dist::{DiscreteDistribution, Element, SampleMultiset};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flattener {
    split_counts: Vec<u32>,
    /// `offsets[0] = 0`, `offsets[i] = split_counts[0] + ... + split_counts[i-1]`.
    offsets: Vec<u64>,
}

impl Flattener {
    pub fn identity(n: usize) -> Self {
        Self::from_split_counts(vec![1; n])
    }

    fn from_split_counts(split_counts: Vec<u32>) -> Self {
        let mut offsets = Vec::with_capacity(split_counts.len() + 1);
        let mut acc = 0u64;
        offsets.push(0);
        for &c in &split_counts {
            acc += c as u64;
            offsets.push(acc);
        }
        Self {
            split_counts,
            offsets,
        }
    }

    pub fn original_n(&self) -> usize {
        self.split_counts.len()
    }

    pub fn new_n(&self) -> usize {
        *self.offsets.last().unwrap() as usize
    }

    pub fn split_counts(&self) -> &[u32] {
        &self.split_counts
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    /// Sub-bin range of `x` as a half-open interval of 1-based new-domain
    /// elements: `(first, first + count)`.
    pub fn range_of(&self, x: Element) -> Result<(u64, u32)> {
        self.check(x)?;
        let i = x as usize - 1;
        Ok((self.offsets[i] + 1, self.split_counts[i]))
    }

    /// Original element owning new-domain element `y`.
    pub fn original_of(&self, y: Element) -> Result<Element> {
        if y == 0 || y as usize > self.new_n() {
            return Err(Error::OutOfDomain {
                element: y as u64,
                n: self.new_n(),
            });
        }
        // offsets[i] < y <= offsets[i+1]
        let i = self.offsets.partition_point(|&o| o < y as u64) - 1;
        Ok(i as Element + 1)
    }

    fn check(&self, x: Element) -> Result<()> {
        if x == 0 || x as usize > self.original_n() {
            return Err(Error::OutOfDomain {
                element: x as u64,
                n: self.original_n(),
            });
        }
        Ok(())
    }
}

/// `split_counts[i] = multiplicity(i) + 1`.
pub fn build_flattener(flatten_samples: &SampleMultiset, n: usize) -> Result<Flattener> {
    if flatten_samples.domain_n() != n {
        return Err(Error::DomainMismatch {
            left: n,
            right: flatten_samples.domain_n(),
        });
    }
    let mut counts = vec![1u32; n];
    for (x, a) in flatten_samples.iter() {
        if x as usize > n {
            return Err(Error::OutOfDomain {
                element: x as u64,
                n,
            });
        }
        counts[x as usize - 1] += a as u32;
    }
    Ok(Flattener::from_split_counts(counts))
}

/// Same as [`build_flattener`] from a raw element list.
pub fn build_flattener_from_elements(elements: &[Element], n: usize) -> Result<Flattener> {
    let mut counts = vec![1u32; n];
    for &x in elements {
        if x == 0 || x as usize > n {
            return Err(Error::OutOfDomain {
                element: x as u64,
                n,
            });
        }
        counts[x as usize - 1] += 1;
    }
    Ok(Flattener::from_split_counts(counts))
}

pub fn flatten_distribution(p: &DiscreteDistribution, f: &Flattener) -> Result<DiscreteDistribution> {
    if p.n() != f.original_n() {
        return Err(Error::DomainMismatch {
            left: p.n(),
            right: f.original_n(),
        });
    }
    let mut out = Vec::with_capacity(f.new_n());
    for (&m, &k) in p.mass().iter().zip(&f.split_counts) {
        out.extend(std::iter::repeat_n(m / k as f64, k as usize));
    }
    // Division by the split counts can shift the sum by a few ulps.
    DiscreteDistribution::from_weights(&out)
}

/// Maps a sample of `p` to a sample of the split distribution by picking a
/// uniform sub-bin of `x`.
#[inline]
pub fn flatten_sample(x: Element, f: &Flattener, rng: &mut Rng) -> Result<Element> {
    f.check(x)?;
    let i = x as usize - 1;
    let k = f.split_counts[i];
    let pick = if k == 1 { 0 } else { rng.below(k as u64) };
    Ok((f.offsets[i] + 1 + pick) as Element)
}
