use std::collections::HashSet;

use proptest::prelude::*;
use ptlab_core::comm::{
    protocol_to_stream, query_player, run_protocol, unary_decode, unary_encode, Bits, DistributedAggregate,
    DistributedBipartite, DistributedCloseness, Player, PlayerSource, Protocol, Transcript,
};
use ptlab_core::dist::{make_disjoint_halves, make_uniform, DiscreteDistribution};
use ptlab_core::streaming::{MemoryLedger, SampleStream};
use ptlab_core::{Error, Rng};

fn player(id: u64) -> Player {
    Player::new(id, vec![1, 2], None, 0)
}

#[test]
fn fuzzed_query_orders_flag_every_revisit() {
    let mut rng = Rng::new(2024, 0);
    for _ in 0..2000 {
        let mut t = Transcript::new();
        let mut retired = HashSet::new();
        let mut current: Option<u64> = None;
        let mut expected_bits = 0u64;
        for _ in 0..30 {
            let id = rng.below(8);
            let len = 1 + rng.below(5) as usize;
            let answer = Bits::from_01(&"1".repeat(len)).unwrap();
            let result = query_player(&mut t, &player(id), |_| answer.clone());
            if retired.contains(&id) {
                assert_eq!(
                    result,
                    Err(Error::OnePassViolation {
                        player: id,
                        current: current.unwrap()
                    })
                );
            } else {
                assert_eq!(result.unwrap().len(), len);
                expected_bits += len as u64;
                if let Some(c) = current.filter(|&c| c != id) {
                    retired.insert(c);
                }
                current = Some(id);
            }
            assert_eq!(t.total_bits(), expected_bits);
        }
    }
}

#[test]
fn forbidden_question_is_never_evaluated() {
    let mut t = Transcript::new();
    query_player(&mut t, &player(1), |_| Bits::from_01("1").unwrap()).unwrap();
    query_player(&mut t, &player(2), |_| Bits::from_01("1").unwrap()).unwrap();
    let mut asked = false;
    let r = query_player(&mut t, &player(1), |_| {
        asked = true;
        Bits::from_01("1").unwrap()
    });
    assert!(r.is_err());
    assert!(!asked);
}

#[test]
fn unary_round_trip_up_to_ten_thousand() {
    for b in 0..=10_000u64 {
        let code = unary_encode(b);
        assert_eq!(code.len() as u64, b + 1);
        assert_eq!(unary_decode(&code).unwrap(), b);
    }
}

proptest! {
    #[test]
    fn transcript_bytes_round_trip(
        entries in proptest::collection::vec((0u64..6, proptest::collection::vec(any::<bool>(), 1..40)), 0..20)
    ) {
        let mut t = Transcript::new();
        for (id, bits) in &entries {
            let mut b = Bits::new();
            for &x in bits { b.push(x); }
            // Out-of-order ids are simply refused; the survivors must round-trip.
            let _ = t.record(*id, &b);
        }
        let sum: u64 = t.entries().map(|(_, b)| b.len() as u64).sum();
        prop_assert_eq!(sum, t.total_bits());
        let back = Transcript::from_bytes(&t.to_bytes()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn unary_rejects_missing_terminator(b in 0u64..500) {
        let mut bits = Bits::new();
        for _ in 0..b { bits.push(true); }
        prop_assert!(matches!(unary_decode(&bits), Err(Error::MalformedCodeword(_))));
    }
}

/// Runs `proto` directly and through the adapter with the same seeds and
/// checks agreement and the memory bound.
fn check_adapter<P: Protocol>(proto: &P, p: &DiscreteDistribution, q: Option<&DiscreteDistribution>, seed: u64) {
    let ell = proto.ell();
    let stream = |d: &DiscreteDistribution, s| SampleStream::new(d, Rng::new(seed, s));
    let source = match q {
        Some(q) => PlayerSource::closeness(stream(p, 0), stream(q, 1), ell).unwrap(),
        None => PlayerSource::uniformity(stream(p, 0), ell).unwrap(),
    };
    let (direct, direct_t) = run_protocol(proto, source, Rng::new(seed, 2)).unwrap();
    let mut ledger = MemoryLedger::new();
    let adapter = protocol_to_stream(proto);
    let (streamed, streamed_t) = adapter
        .run(stream(p, 0), q.map(|q| stream(q, 1)), &mut ledger, Rng::new(seed, 2))
        .unwrap();
    assert_eq!(direct.decision, streamed.decision);
    assert_eq!(direct_t, streamed_t);
    assert_eq!(direct.samples_used, streamed.samples_used);
    let t = streamed_t.total_bits();
    assert!(ledger.peak_bits() <= adapter.memory_bound(t), "peak {} > bound {}", ledger.peak_bits(), adapter.memory_bound(t));
    assert_eq!(streamed.peak_memory_bits, Some(ledger.peak_bits()));
}

#[test]
fn adapter_agrees_with_every_protocol() {
    let n = 256;
    let u = make_uniform(n).unwrap();
    let (a, b) = make_disjoint_halves(n).unwrap();
    for seed in 0..10 {
        check_adapter(&DistributedAggregate::new(n, 6, 1.0).unwrap(), &u, None, seed);
        check_adapter(&DistributedBipartite::new(n, 3, 1.0).unwrap(), &u, None, seed);
        check_adapter(&DistributedBipartite::new(n, 3, 1.0).unwrap(), &a, None, seed);
        check_adapter(&DistributedCloseness::new(n, 2, 1.0).unwrap(), &u, Some(&u), seed);
        check_adapter(&DistributedCloseness::new(n, 2, 1.0).unwrap(), &a, Some(&b), seed);
    }
}

#[test]
fn adapter_budget_violation_is_reported() {
    let u = make_uniform(64).unwrap();
    let proto = DistributedAggregate::new(64, 4, 1.0).unwrap();
    let mut ledger = MemoryLedger::with_budget(30);
    let r = protocol_to_stream(&proto).run(SampleStream::new(&u, Rng::new(0, 0)), None, &mut ledger, Rng::new(0, 1));
    assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
}
