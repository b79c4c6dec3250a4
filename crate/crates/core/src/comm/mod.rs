//! One-pass blackboard communication runtime.
//!
//! A referee queries players one at a time; each player holds `ell` samples.
//! Only answer bits are charged: questions, addressing and anything the
//! referee broadcasts (lookup tables, the subset `W`, a flattening) are free.
//! A player that has been left is never queried again.

mod bits;
mod closeness;
mod players;
mod protocol;
mod session;
mod transcript;
mod unary;
mod uniformity;

pub use bits::{BitReader, Bits};
pub use closeness::{distributed_closeness, DistributedCloseness};
pub use players::{Player, PlayerSource};
pub use protocol::{protocol_to_stream, run_protocol, Outcome, Protocol, StreamedProtocol};
pub use session::{query_player, Session, PLAYER_SLOT, TRANSCRIPT_SLOT};
pub use transcript::Transcript;
pub use unary::{unary_decode, unary_encode, unary_encode_into, unary_read};
pub use uniformity::{
    distributed_aggregate_uniformity, distributed_bipartite_uniformity, DistributedAggregate,
    DistributedBipartite, AGGREGATE_PLAYERS,
};
