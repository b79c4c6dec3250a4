//! Distribution testers under memory and communication constraints.
//!
//! Uniformity and closeness testers run inside two instrumented runtimes: a
//! one-pass streaming runtime that charges every bit of live state to a
//! [`streaming::MemoryLedger`], and a one-pass referee/player runtime that
//! charges every answer bit to a [`comm::Transcript`].

pub mod comm;
pub mod constants;
pub mod dist;
pub mod error;
pub mod exact;
pub mod flatten;
pub mod hashing;
pub mod l2;
pub mod rng;
pub mod streaming;
pub mod verdict;

pub use error::{Error, Result};
pub use rng::Rng;
pub use verdict::{Decision, TestVerdict};
