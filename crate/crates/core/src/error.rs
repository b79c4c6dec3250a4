use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain size {0}: must be at least 1")]
    InvalidDomain(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },

    #[error("element {element} outside domain [1, {n}]")]
    OutOfDomain { element: u64, n: usize },

    #[error("stream exhausted after {drawn} samples (needed more)")]
    InsufficientSamples { drawn: u64 },

    #[error("stream position {requested} already consumed (next readable position is {next})")]
    StreamRewind { requested: u64, next: u64 },

    #[error("memory budget exceeded: charging {requested} bits to `{slot}` would bring live usage to {would_be} > budget {budget}")]
    BudgetExceeded {
        slot: &'static str,
        requested: u64,
        would_be: u64,
        budget: u64,
    },

    #[error("one-pass violation: player {player} queried again after player {current} spoke")]
    OnePassViolation { player: u64, current: u64 },

    #[error("player {0} sent an empty answer; every participating player sends at least one bit")]
    EmptyAnswer(u64),

    #[error("malformed codeword: {0}")]
    MalformedCodeword(String),

    #[error("player source exhausted after {0} players")]
    InsufficientPlayers(u64),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
