//! Bipartite collision uniformity testing, centralized and as a one-pass
//! streaming algorithm under a memory budget.
//!
//! A first sample set `S1` is stored; every later sample is scored by how
//! many times it occurs in `S1`. The mean score estimates `p(S1)`, which is
//! `N1/n` for the uniform distribution and noticeably larger for far ones.

use crate::dist::Element;
use crate::error::{Error, Result};
use crate::hashing::ceil_log2;
use crate::streaming::{occurrences, MemoryLedger, SampleStream};
use crate::verdict::{Decision, TestVerdict};
use crate::constants;

/// Reject outright when some element occurs more than this many times in `S1`.
pub const MAX_MULTIPLICITY: u64 = 10;

/// `T = (N1 / n) (1 + eps^2 / 50)`, evaluated as `N1 (50 + eps^2) / (50 n)`.
pub fn bipartite_threshold(n1: u64, n: usize, eps: f64) -> f64 {
    n1 as f64 * (50.0 + eps * eps) / (50.0 * n as f64)
}

/// Default second-phase size for the centralized tester.
pub fn bipartite_default_n2(n: usize, eps: f64, n1: u64) -> u64 {
    (constants::BIPARTITE_N2 * n as f64 / (n1 as f64 * eps.powi(4))).ceil() as u64
}

/// Bits per stored element of `[n]`.
pub fn element_bits(n: usize) -> u64 {
    ceil_log2(n as u64).max(1)
}

/// Peak ledger footprint of a run that passes the multiplicity screen.
pub fn bipartite_footprint_bits(n: usize, n1: u64, n2: u64) -> u64 {
    let width = element_bits(n);
    width
        + ceil_log2(n1.max(n2) + 1).max(1)
        + n1 * width
        + ceil_log2(MAX_MULTIPLICITY + 2).max(ceil_log2(MAX_MULTIPLICITY * n2) + 1)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::param("eps", format!("{eps} is outside (0, 2]")));
    }
    Ok(())
}

fn max_run(sorted: &[Element]) -> u64 {
    let mut best = 0;
    let mut run = 0;
    let mut prev = None;
    for &x in sorted {
        if Some(x) == prev {
            run += 1;
        } else {
            run = 1;
            prev = Some(x);
        }
        best = best.max(run);
    }
    best
}

/// Shared body. With a ledger, each piece of live state is charged as it
/// comes into existence.
fn run_bipartite(
    stream: &mut SampleStream,
    n: usize,
    eps: f64,
    n1: u64,
    n2: u64,
    mut ledger: Option<&mut MemoryLedger>,
) -> Result<TestVerdict> {
    if n == 0 {
        return Err(Error::InvalidDomain(0));
    }
    if stream.n() != n {
        return Err(Error::DomainMismatch {
            left: n,
            right: stream.n(),
        });
    }
    check_eps(eps)?;
    if n1 == 0 || n2 == 0 {
        return Err(Error::param("N1/N2", "both sample-set sizes must be positive"));
    }
    let start = stream.drawn();
    let width = element_bits(n);
    if let Some(l) = ledger.as_deref_mut() {
        l.set("sample_register", width)?;
        l.set("loop_counter", ceil_log2(n1.max(n2) + 1).max(1))?;
    }

    // Steps 1-2: store S1.
    let mut s1 = Vec::with_capacity(n1 as usize);
    for _ in 0..n1 {
        let x = stream.next_sample()?;
        if let Some(l) = ledger.as_deref_mut() {
            l.charge("s1", width)?;
        }
        s1.push(x);
    }
    s1.sort_unstable();

    // Step 3: multiplicity screen (a run-length counter up to 11).
    if let Some(l) = ledger.as_deref_mut() {
        l.set("run_counter", ceil_log2(MAX_MULTIPLICITY + 2))?;
    }
    let screened_out = max_run(&s1) > MAX_MULTIPLICITY;
    if let Some(l) = ledger.as_deref_mut() {
        l.release("run_counter");
    }
    if screened_out {
        return Ok(TestVerdict::new(Decision::Reject, stream.drawn() - start));
    }

    // Step 4: every b_k is at most 10 now, so the sum fits below 10 * N2.
    if let Some(l) = ledger.as_deref_mut() {
        l.set("collision_sum", ceil_log2(MAX_MULTIPLICITY * n2) + 1)?;
    }
    let mut sum = 0u64;
    for _ in 0..n2 {
        let x = stream.next_sample()?;
        sum += occurrences(&s1, x);
    }

    // Steps 5-6.
    let z = sum as f64 / n2 as f64;
    let t = bipartite_threshold(n1, n, eps);
    let decision = if z >= t { Decision::Reject } else { Decision::Accept };
    Ok(TestVerdict::new(decision, stream.drawn() - start))
}

/// Centralized bipartite collision tester. The caller picks `N1` and `N2`;
/// the guarantee needs `N1 * N2` of order `n / eps^4` and `N1 <= n^0.9`.
pub fn bipartite_collision_uniformity(
    stream: &mut SampleStream,
    n: usize,
    eps: f64,
    n1: u64,
    n2: u64,
) -> Result<TestVerdict> {
    let mut v = run_bipartite(stream, n, eps, n1, n2, None)?;
    v.unproven_regime = (n1 as f64) > (n as f64).powf(0.9)
        || (n1 as f64) * (n2 as f64) < n as f64 / eps.powi(4);
    Ok(v)
}

/// Sizes for [`streaming_uniformity`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamingUniformityParams {
    pub n: usize,
    pub m_bits: u64,
    pub eps: f64,
    /// `floor(m / (2 ceil(log2 n)))`.
    pub n1: u64,
    pub n2: u64,
}

impl StreamingUniformityParams {
    pub fn new(n: usize, m_bits: u64, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDomain(0));
        }
        check_eps(eps)?;
        let width = element_bits(n);
        let n1 = m_bits / (2 * width);
        if n1 == 0 {
            return Err(Error::param(
                "m_bits",
                format!("{m_bits} bits cannot hold a single sample of [{n}]"),
            ));
        }
        let n2 = (constants::STREAMING_N2 * n as f64 * width as f64 / (m_bits as f64 * eps.powi(4)))
            .ceil() as u64;
        let params = Self {
            n,
            m_bits,
            eps,
            n1,
            n2: n2.max(1),
        };
        params.check_fits()?;
        Ok(params)
    }

    /// Ledger peak of a run with these sizes.
    pub fn footprint_bits(&self) -> u64 {
        bipartite_footprint_bits(self.n, self.n1, self.n2)
    }

    fn check_fits(&self) -> Result<()> {
        if self.footprint_bits() > self.m_bits {
            return Err(Error::param(
                "m_bits",
                format!(
                    "{} bits cannot hold {} stored samples plus counters ({} bits needed)",
                    self.m_bits,
                    self.n1,
                    self.footprint_bits()
                ),
            ));
        }
        Ok(())
    }

    /// Overrides the second phase so the run draws `total` samples in all.
    pub fn with_total_samples(mut self, total: u64) -> Result<Self> {
        if total <= self.n1 {
            return Err(Error::param(
                "samples",
                format!("{total} samples leave nothing after the first {} stored ones", self.n1),
            ));
        }
        self.n2 = total - self.n1;
        self.check_fits()?;
        Ok(self)
    }

    /// Outside `log n / eps^6 <= m <= n^0.9 log n` (unit constants).
    pub fn unproven_regime(&self) -> bool {
        let log_n = element_bits(self.n) as f64;
        let m = self.m_bits as f64;
        m < log_n / self.eps.powi(6) || m > (self.n as f64).powf(0.9) * log_n
    }
}

/// One-pass uniformity tester using at most `m_bits` bits of state.
///
/// If the ledger has no budget, `m_bits` becomes its budget.
pub fn streaming_uniformity(
    stream: &mut SampleStream,
    n: usize,
    m_bits: u64,
    eps: f64,
    ledger: &mut MemoryLedger,
) -> Result<TestVerdict> {
    let params = StreamingUniformityParams::new(n, m_bits, eps)?;
    streaming_uniformity_with(stream, &params, ledger)
}

pub fn streaming_uniformity_with(
    stream: &mut SampleStream,
    params: &StreamingUniformityParams,
    ledger: &mut MemoryLedger,
) -> Result<TestVerdict> {
    if ledger.budget_bits().is_none() {
        ledger.set_budget(Some(params.m_bits));
    }
    let mut v = run_bipartite(stream, params.n, params.eps, params.n1, params.n2, Some(ledger))?;
    v.peak_memory_bits = Some(ledger.peak_bits());
    v.unproven_regime = params.unproven_regime();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_uniform, DiscreteDistribution};
    use crate::rng::Rng;

    #[test]
    fn threshold_example() {
        assert_eq!(bipartite_threshold(100, 1000, 0.5), 0.1005);
    }

    #[test]
    fn first_sample_size() {
        let p = StreamingUniformityParams::new(1024, 2048, 0.5).unwrap();
        assert_eq!(p.n1, 102);
        assert!(StreamingUniformityParams::new(1024, 10, 0.5).is_err());
        assert!(StreamingUniformityParams::new(1024, 2048, 0.0).is_err());
        let q = p.with_total_samples(1000).unwrap();
        assert_eq!(q.n1 + q.n2, 1000);
        assert!(p.with_total_samples(102).is_err());
    }

    #[test]
    fn occurrences_counts_runs() {
        let s = [1, 3, 3, 3, 7, 9, 9];
        for (x, c) in [(0, 0), (1, 1), (2, 0), (3, 3), (7, 1), (8, 0), (9, 2), (10, 0)] {
            assert_eq!(occurrences(&s, x), c, "x = {x}");
        }
        assert_eq!(occurrences(&[], 4), 0);
        assert_eq!(max_run(&s), 3);
    }

    #[test]
    fn heavy_first_set_rejects_before_second_phase() {
        // A point mass puts all N1 samples on one element.
        let p = DiscreteDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let mut s = SampleStream::new(&p, Rng::new(1, 0));
        let v = bipartite_collision_uniformity(&mut s, 4, 0.5, 11, 1000).unwrap();
        assert_eq!(v.decision, Decision::Reject);
        assert_eq!(v.samples_used, 11);
        // Ten copies pass the screen.
        let mut s = SampleStream::new(&p, Rng::new(1, 0));
        let v = bipartite_collision_uniformity(&mut s, 4, 0.5, 10, 5).unwrap();
        assert_eq!(v.samples_used, 15);
    }

    #[test]
    fn single_element_domain_never_reaches_threshold() {
        // n = 1: every S2 sample collides N1 times, Z = N1, T = N1 (1 + eps^2/50) > Z.
        let p = make_uniform(1).unwrap();
        let mut s = SampleStream::new(&p, Rng::new(1, 0));
        let v = bipartite_collision_uniformity(&mut s, 1, 0.5, 3, 4).unwrap();
        assert_eq!(v.decision, Decision::Accept);
    }

    #[test]
    fn exhausted_stream_is_an_error() {
        let p = make_uniform(100).unwrap();
        let mut s = SampleStream::new(&p, Rng::new(1, 0)).with_limit(50);
        assert_eq!(
            bipartite_collision_uniformity(&mut s, 100, 0.5, 10, 100),
            Err(Error::InsufficientSamples { drawn: 50 })
        );
    }

    #[test]
    fn peak_within_budget_and_layout() {
        let n = 1024;
        let m = 2048;
        let p = make_uniform(n).unwrap();
        let mut s = SampleStream::new(&p, Rng::new(2, 0));
        let mut ledger = MemoryLedger::new();
        let v = streaming_uniformity(&mut s, n, m, 0.5, &mut ledger).unwrap();
        let params = StreamingUniformityParams::new(n, m, 0.5).unwrap();
        let expected = 102 * 10
            + 10
            + ceil_log2(params.n2 + 1)
            + ceil_log2(10 * params.n2)
            + 1;
        assert_eq!(v.peak_memory_bits, Some(expected));
        assert!(expected <= m);
        assert_eq!(ledger.budget_bits(), Some(m));
    }

    #[test]
    fn tight_budget_fails_loudly() {
        let n = 1024;
        let p = make_uniform(n).unwrap();
        let mut s = SampleStream::new(&p, Rng::new(2, 0));
        let mut ledger = MemoryLedger::with_budget(500);
        let err = streaming_uniformity(&mut s, n, 2048, 0.5, &mut ledger).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
