//! Closeness testing in one pass with `O(m log n)` bits: flatten both
//! distributions with `O(m)` stored samples, hash the split domain into `m`
//! buckets, and run an l2 test on the bucket counts.

use crate::constants;
use crate::dist::Element;
use crate::error::{Error, Result};
use crate::hashing::{ceil_log2, sample_hash};
use crate::l2::{l2_closeness_test, BucketCounts};
use crate::rng::Rng;
use crate::streaming::{element_bits, lower_bound, occurrences, MemoryLedger, SampleStream};
use crate::verdict::TestVerdict;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosenessMemoryParams {
    pub n: usize,
    pub m_buckets: usize,
    pub eps: f64,
    /// Flattening samples drawn from each side.
    pub flatten_per_side: u64,
    /// Poisson intensity of the counting phase, per side.
    pub n_param: f64,
    /// Hard cap on counted samples per side; sizes every counter.
    pub count_cap: u64,
}

impl ClosenessMemoryParams {
    pub fn new(n: usize, m_buckets: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDomain(0));
        }
        if m_buckets == 0 {
            return Err(Error::param("m_buckets", "must be at least 1"));
        }
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(Error::param("eps", format!("{eps} is outside (0, 2]")));
        }
        let flatten_per_side =
            (constants::CLOSENESS_FLATTEN_PER_BUCKET * m_buckets as f64).ceil() as u64;
        let n_param =
            (constants::CLOSENESS_MEMORY_SAMPLES * n as f64 / ((m_buckets as f64).sqrt() * eps * eps)).ceil();
        Ok(Self {
            n,
            m_buckets,
            eps,
            flatten_per_side,
            n_param,
            count_cap: (2.0 * n_param) as u64,
        })
    }

    /// Size of the split domain.
    pub fn new_n(&self) -> usize {
        self.n + 2 * self.flatten_per_side as usize
    }

    /// l2 separation the final test looks for: `eps / (2 sqrt(n'))`.
    pub fn threshold(&self) -> f64 {
        self.eps / (2.0 * (self.new_n() as f64).sqrt())
    }

    /// Outside `1 < m < min(n, n^(2/3) / eps^(4/3))`.
    pub fn unproven_regime(&self) -> bool {
        let n = self.n as f64;
        let upper = n.min(n.powf(2.0 / 3.0) / self.eps.powf(4.0 / 3.0));
        self.m_buckets < 2 || self.m_buckets as f64 > upper
    }
}

/// Maps `x` to a uniform sub-bin of the split domain defined by the sorted
/// flattening samples: `x` owns `1 + #{s == x}` sub-bins starting after
/// `(x - 1) + #{s < x}` earlier ones. This is the layout of
/// [`crate::flatten::Flattener`] computed from the stored samples alone.
#[inline]
pub(crate) fn flatten_via_sorted(sorted: &[Element], x: Element, coins: &mut Rng) -> Element {
    let before = lower_bound(sorted, x) as u64;
    let split = 1 + occurrences(sorted, x);
    let pick = if split == 1 { 0 } else { coins.below(split) };
    ((x as u64 - 1) + before + 1 + pick) as Element
}

/// One-pass closeness tester.
///
/// `coins` supplies the algorithm's private randomness (hash choice, sub-bin
/// choice, Poisson sample counts). If the ledger has no budget, the
/// `64 * m * ceil(log2 n)` envelope becomes its budget.
pub fn closeness_memory(
    stream_p: &mut SampleStream,
    stream_q: &mut SampleStream,
    params: &ClosenessMemoryParams,
    ledger: &mut MemoryLedger,
    coins: &mut Rng,
) -> Result<TestVerdict> {
    let n = params.n;
    for s in [&*stream_p, &*stream_q] {
        if s.n() != n {
            return Err(Error::DomainMismatch { left: n, right: s.n() });
        }
    }
    if ledger.budget_bits().is_none() {
        ledger.set_budget(Some(64 * params.m_buckets as u64 * element_bits(n)));
    }
    let start = stream_p.drawn() + stream_q.drawn();
    let width = element_bits(n);
    ledger.set("sample_register", width)?;

    // Step 1: store flattening samples from both sides.
    let mut stored = Vec::with_capacity(2 * params.flatten_per_side as usize);
    for stream in [&mut *stream_p, &mut *stream_q] {
        for _ in 0..params.flatten_per_side {
            stored.push(stream.next_sample()?);
            ledger.charge("flatten_samples", width)?;
        }
    }
    stored.sort_unstable();
    let new_n = params.new_n();

    // Step 2: hash the split domain into m buckets.
    let h = sample_hash(new_n, params.m_buckets, coins)?;
    ledger.set("hash", h.representation_bits())?;

    // Step 3: Poissonized counting.
    let counter_bits = ceil_log2(params.count_cap + 1).max(1);
    ledger.set("bucket_counts", 2 * params.m_buckets as u64 * counter_bits)?;
    ledger.set("remaining", 2 * counter_bits)?;
    let mut counts = [vec![0u64; params.m_buckets], vec![0u64; params.m_buckets]];
    for (side, stream) in [&mut *stream_p, &mut *stream_q].into_iter().enumerate() {
        let k = coins.poisson(params.n_param).min(params.count_cap);
        for _ in 0..k {
            let x = stream.next_sample()?;
            let y = flatten_via_sorted(&stored, x, coins);
            counts[side][h.bucket(y) - 1] += 1;
        }
    }
    let [x_counts, y_counts] = counts;
    let bucket_counts = BucketCounts::new(x_counts, y_counts, params.n_param)?;
    let mut v = l2_closeness_test(&bucket_counts, params.threshold())?;
    v.samples_used = stream_p.drawn() + stream_q.drawn() - start;
    v.peak_memory_bits = Some(ledger.peak_bits());
    v.unproven_regime = params.unproven_regime();
    Ok(v)
}
