use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    /// "YES": uniform, or the two distributions are equal.
    Accept,
    /// "NO": far.
    Reject,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
        })
    }
}

/// Outcome of one tester run plus the resources it consumed.
///
/// `peak_memory_bits` is set only by runs hosted on a memory ledger and
/// `comm_bits` only by runs hosted on a transcript.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestVerdict {
    pub decision: Decision,
    pub samples_used: u64,
    pub peak_memory_bits: Option<u64>,
    pub comm_bits: Option<u64>,
    /// Parameters fell outside the range where the tester's guarantee is proven.
    pub unproven_regime: bool,
    /// The run hit a hard resource cap and stopped early.
    pub aborted: bool,
}

impl TestVerdict {
    pub fn new(decision: Decision, samples_used: u64) -> Self {
        Self {
            decision,
            samples_used,
            peak_memory_bits: None,
            comm_bits: None,
            unproven_regime: false,
            aborted: false,
        }
    }

    pub fn is_accept(&self) -> bool {
        self.decision == Decision::Accept
    }
}
