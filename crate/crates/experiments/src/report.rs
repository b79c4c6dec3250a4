//! Aggregated trial results.

use ptlab_core::Decision;

use crate::config::{ExperimentConfig, Instance, Tester};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n);
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Result of a single trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub decision: Decision,
    pub expected: Decision,
    pub samples: u64,
    pub peak_bits: Option<u64>,
    pub comm_bits: Option<u64>,
    pub aborted: bool,
    pub unproven_regime: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub tester: Tester,
    pub n: usize,
    pub eps: f64,
    pub ell: Option<usize>,
    pub mem_bits: Option<u64>,
    pub buckets: Option<usize>,
    pub samples_setting: Option<u64>,
    pub trials: u64,
    pub seed: u64,
    pub instance: Instance,
    pub expected: Decision,
    pub accepts: u64,
    pub rejects: u64,
    pub err_rate: f64,
    pub err_lo: f64,
    pub err_hi: f64,
    pub mean_samples: f64,
    pub max_samples: u64,
    pub mean_peak_bits: Option<f64>,
    pub max_peak_bits: Option<u64>,
    pub mean_comm_bits: Option<f64>,
    pub max_comm_bits: Option<u64>,
    pub aborted: u64,
    pub unproven_regime: bool,
}

/// Exact sum and max of an optional per-trial quantity.
fn reduce(values: impl Iterator<Item = Option<u64>>) -> (Option<u128>, Option<u64>) {
    let mut sum: Option<u128> = None;
    let mut max: Option<u64> = None;
    for v in values.flatten() {
        sum = Some(sum.unwrap_or(0) + v as u128);
        max = Some(max.map_or(v, |m| m.max(v)));
    }
    (sum, max)
}

impl TrialReport {
    /// Every reduction is a count, an exact integer sum or a max, so the
    /// report does not depend on the order of `outcomes`.
    pub fn aggregate(config: &ExperimentConfig, expected: Decision, outcomes: &[TrialOutcome]) -> Self {
        let trials = outcomes.len() as u64;
        assert!(trials > 0, "no trials to aggregate");
        let accepts = outcomes.iter().filter(|o| o.decision == Decision::Accept).count() as u64;
        let rejects = trials - accepts;
        let errors = outcomes.iter().filter(|o| o.decision != o.expected).count() as u64;
        let (err_lo, err_hi) = wilson_interval(errors, trials, Z95);
        let mean = |s: Option<u128>| s.map(|s| s as f64 / trials as f64);
        let (samples_sum, max_samples) = reduce(outcomes.iter().map(|o| Some(o.samples)));
        let (peak_sum, max_peak_bits) = reduce(outcomes.iter().map(|o| o.peak_bits));
        let (comm_sum, max_comm_bits) = reduce(outcomes.iter().map(|o| o.comm_bits));
        Self {
            tester: config.tester,
            n: config.n,
            eps: config.eps,
            ell: config.ell,
            mem_bits: config.mem_bits,
            buckets: config.buckets,
            samples_setting: config.samples,
            trials,
            seed: config.seed,
            instance: config.instance.clone(),
            expected,
            accepts,
            rejects,
            err_rate: errors as f64 / trials as f64,
            err_lo,
            err_hi,
            mean_samples: mean(samples_sum).unwrap_or(0.0),
            max_samples: max_samples.unwrap_or(0),
            mean_peak_bits: mean(peak_sum),
            max_peak_bits,
            mean_comm_bits: mean(comm_sum),
            max_comm_bits,
            aborted: outcomes.iter().filter(|o| o.aborted).count() as u64,
            unproven_regime: outcomes.iter().any(|o| o.unproven_regime),
        }
    }

    pub fn errors(&self) -> u64 {
        match self.expected {
            Decision::Accept => self.rejects,
            Decision::Reject => self.accepts,
        }
    }

    /// The upper confidence bound on the error rate is at most 1/3.
    pub fn is_reliable(&self) -> bool {
        self.err_hi <= 1.0 / 3.0
    }
}

impl std::fmt::Display for TrialReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "tester          {}", self.tester)?;
        writeln!(f, "instance        {} (correct answer: {})", self.instance, self.expected)?;
        writeln!(f, "n, eps          {}, {}", self.n, self.eps)?;
        if let Some(l) = self.ell {
            writeln!(f, "ell             {l}")?;
        }
        if let Some(m) = self.mem_bits {
            writeln!(f, "mem bits        {m}")?;
        }
        if let Some(b) = self.buckets {
            writeln!(f, "buckets         {b}")?;
        }
        writeln!(f, "trials, seed    {}, {}", self.trials, self.seed)?;
        writeln!(f, "accept/reject   {}/{}", self.accepts, self.rejects)?;
        writeln!(
            f,
            "error rate      {:.4}  [{:.4}, {:.4}]  {}",
            self.err_rate,
            self.err_lo,
            self.err_hi,
            if self.is_reliable() { "reliable" } else { "NOT reliable" }
        )?;
        writeln!(f, "samples         mean {:.1}, max {}", self.mean_samples, self.max_samples)?;
        if let (Some(m), Some(x)) = (self.mean_peak_bits, self.max_peak_bits) {
            writeln!(f, "peak memory     mean {m:.1}, max {x} bits")?;
        }
        if let (Some(m), Some(x)) = (self.mean_comm_bits, self.max_comm_bits) {
            writeln!(f, "communication   mean {m:.1}, max {x} bits")?;
        }
        if self.aborted > 0 {
            writeln!(f, "aborted runs    {}", self.aborted)?;
        }
        if self.unproven_regime {
            writeln!(f, "warning         parameters outside the proven regime")?;
        }
        Ok(())
    }
}
