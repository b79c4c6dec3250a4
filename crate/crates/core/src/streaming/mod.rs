//! One-pass streaming execution with bit-exact memory accounting.

mod closeness;
mod ledger;
mod stream;
mod uniformity;

pub use closeness::{closeness_memory, ClosenessMemoryParams};
pub use ledger::MemoryLedger;
pub use stream::SampleStream;
pub use uniformity::{
    bipartite_collision_uniformity, bipartite_default_n2, bipartite_footprint_bits, bipartite_threshold, element_bits,
    streaming_uniformity, streaming_uniformity_with, StreamingUniformityParams, MAX_MULTIPLICITY,
};

use crate::dist::Element;

/// Index of the first entry of sorted `s` that is not less than `x`.
#[inline]
pub(crate) fn lower_bound(s: &[Element], x: Element) -> usize {
    // Branch-free halving.
    let mut base = 0usize;
    let mut len = s.len();
    while len > 1 {
        let half = len / 2;
        if s[base + half - 1] < x {
            base += half;
        }
        len -= half;
    }
    if len == 1 && s[base] < x {
        base += 1;
    }
    base
}

/// Number of entries of sorted `s` equal to `x`.
#[inline]
pub(crate) fn occurrences(s: &[Element], x: Element) -> u64 {
    let i = lower_bound(s, x);
    s[i..].iter().take_while(|&&y| y == x).count() as u64
}
