use crate::comm::players::PlayerSource;
use crate::comm::session::Session;
use crate::comm::transcript::Transcript;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::streaming::{element_bits, MemoryLedger, SampleStream};
use crate::verdict::{Decision, TestVerdict};

/// What a protocol reports back besides its resource usage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub decision: Decision,
    pub aborted: bool,
    pub unproven_regime: bool,
}

impl Outcome {
    pub fn new(decision: Decision, unproven_regime: bool) -> Self {
        Self {
            decision,
            aborted: false,
            unproven_regime,
        }
    }
}

/// A one-pass referee strategy.
pub trait Protocol {
    fn n(&self) -> usize;

    fn ell(&self) -> usize;

    /// Whether players hold samples of two distributions.
    fn is_closeness(&self) -> bool {
        false
    }

    fn execute(&self, session: &mut Session<'_>) -> Result<Outcome>;
}

fn check_source<P: Protocol + ?Sized>(protocol: &P, source: &PlayerSource) -> Result<()> {
    if source.n() != protocol.n() {
        return Err(Error::DomainMismatch {
            left: protocol.n(),
            right: source.n(),
        });
    }
    if source.ell() != protocol.ell() {
        return Err(Error::param(
            "ell",
            format!("players hold {} samples, protocol expects {}", source.ell(), protocol.ell()),
        ));
    }
    if source.is_closeness() != protocol.is_closeness() {
        return Err(Error::param(
            "players",
            "closeness protocols need players holding samples of both distributions",
        ));
    }
    Ok(())
}

fn finish(session: Session<'_>, outcome: Outcome) -> (TestVerdict, Transcript) {
    let mut v = TestVerdict::new(outcome.decision, session.samples_drawn());
    v.comm_bits = Some(session.total_bits());
    v.aborted = outcome.aborted;
    v.unproven_regime = outcome.unproven_regime;
    (v, session.into_transcript())
}

/// Runs `protocol` against `players`, with `coins` as the referee's randomness.
pub fn run_protocol<P: Protocol + ?Sized>(
    protocol: &P,
    players: PlayerSource,
    coins: Rng,
) -> Result<(TestVerdict, Transcript)> {
    check_source(protocol, &players)?;
    let mut session = Session::new(players, coins);
    let outcome = protocol.execute(&mut session)?;
    Ok(finish(session, outcome))
}

/// A protocol recast as a one-pass streaming algorithm.
///
/// The stream is cut into consecutive blocks of `ell` samples, one block per
/// simulated player. Memory holds the transcript written so far and the
/// samples of the player currently speaking; everything else the referee does
/// is a function of those and of its own coins, which are not charged.
#[derive(Debug)]
pub struct StreamedProtocol<'p, P: ?Sized> {
    protocol: &'p P,
}

pub fn protocol_to_stream<P: Protocol + ?Sized>(protocol: &P) -> StreamedProtocol<'_, P> {
    StreamedProtocol { protocol }
}

impl<P: Protocol + ?Sized> StreamedProtocol<'_, P> {
    /// `|T| + (samples per player) * ceil(log2 n)`.
    pub fn memory_bound(&self, transcript_bits: u64) -> u64 {
        let per_player = if self.protocol.is_closeness() { 2 } else { 1 } * self.protocol.ell() as u64;
        transcript_bits + per_player * element_bits(self.protocol.n())
    }

    /// Streams `p` (and `q` for closeness protocols) through the protocol,
    /// charging `ledger`. The verdict's `samples_used` counts all samples
    /// consumed from both streams.
    pub fn run(
        &self,
        stream_p: SampleStream,
        stream_q: Option<SampleStream>,
        ledger: &mut MemoryLedger,
        coins: Rng,
    ) -> Result<(TestVerdict, Transcript)> {
        let ell = self.protocol.ell();
        let players = match stream_q {
            Some(q) => PlayerSource::closeness(stream_p, q, ell)?,
            None => PlayerSource::uniformity(stream_p, ell)?,
        };
        check_source(self.protocol, &players)?;
        let mut session = Session::new(players, coins).with_ledger(ledger);
        let outcome = self.protocol.execute(&mut session)?;
        let (mut v, t) = finish(session, outcome);
        v.peak_memory_bits = Some(ledger.peak_bits());
        Ok((v, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::DistributedAggregate;
    use crate::dist::make_uniform;

    #[test]
    fn adapter_peak_example() {
        let proto = DistributedAggregate {
            n: 256,
            ell: 5,
            eps: 1.0,
            m: 10,
        };
        let u = make_uniform(256).unwrap();
        let mut ledger = MemoryLedger::new();
        let stream = SampleStream::new(&u, Rng::new(8, 0));
        let (v, t) = protocol_to_stream(&proto).run(stream, None, &mut ledger, Rng::new(0, 0)).unwrap();
        assert_eq!(t.total_bits(), 40);
        assert_eq!(v.peak_memory_bits, Some(80));
        assert!(v.samples_used <= t.total_bits() * 5);
        assert_eq!(protocol_to_stream(&proto).memory_bound(40), 80);
    }

    #[test]
    fn adapter_matches_direct_run() {
        let proto = DistributedAggregate::new(128, 6, 1.0).unwrap();
        let u = make_uniform(128).unwrap();
        for seed in 0..5 {
            let direct = run_protocol(
                &proto,
                PlayerSource::uniformity(SampleStream::new(&u, Rng::new(seed, 0)), 6).unwrap(),
                Rng::new(seed, 1),
            )
            .unwrap();
            let mut ledger = MemoryLedger::new();
            let streamed = protocol_to_stream(&proto)
                .run(SampleStream::new(&u, Rng::new(seed, 0)), None, &mut ledger, Rng::new(seed, 1))
                .unwrap();
            assert_eq!(direct.1, streamed.1);
            assert_eq!(direct.0.decision, streamed.0.decision);
            assert_eq!(direct.0.comm_bits, streamed.0.comm_bits);
        }
    }

    #[test]
    fn mismatched_source_is_rejected() {
        let proto = DistributedAggregate::new(128, 6, 1.0).unwrap();
        let u = make_uniform(64).unwrap();
        let src = PlayerSource::uniformity(SampleStream::new(&u, Rng::new(0, 0)), 6).unwrap();
        assert!(run_protocol(&proto, src, Rng::new(0, 0)).is_err());
    }
}
