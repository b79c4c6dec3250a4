//! Distributed uniformity testers.

use crate::comm::bits::Bits;
use crate::comm::players::PlayerSource;
use crate::comm::protocol::{run_protocol, Outcome, Protocol};
use crate::comm::session::Session;
use crate::comm::unary::{unary_decode, unary_encode};
use crate::constants;
use crate::dist::Element;
use crate::error::{Error, Result};
use crate::hashing::ceil_log2;
use crate::rng::Rng;
use crate::streaming::{element_bits, MAX_MULTIPLICITY};
use crate::verdict::{Decision, TestVerdict};

fn check_common(n: usize, ell: usize, eps: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDomain(n));
    }
    if ell == 0 {
        return Err(Error::param("ell", "must be at least 1"));
    }
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::param("eps", format!("{eps} is outside (0, 2]")));
    }
    Ok(())
}

/// Two-phase protocol: `m1` players reveal their samples, forming `S1`; then
/// `m2` fresh players each report, in unary, how many times their own samples
/// occur in `S1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributedBipartite {
    pub n: usize,
    pub ell: usize,
    pub eps: f64,
    pub m1: u64,
    pub m2: u64,
}

impl DistributedBipartite {
    pub fn new(n: usize, ell: usize, eps: f64) -> Result<Self> {
        check_common(n, ell, eps)?;
        let log_n = (n as f64).log2();
        let l = ell as f64;
        let m1 = (constants::DIST_BIPARTITE_M1 * (n as f64 / log_n).sqrt() / (eps * eps * l.powf(1.5)))
            .ceil()
            .max(1.0) as u64;
        let m2 = (constants::DIST_BIPARTITE_M2 * n as f64 / (eps.powi(4) * l * l * m1 as f64))
            .ceil()
            .max(1.0) as u64;
        Ok(Self { n, ell, eps, m1, m2 })
    }

    pub fn with_counts(n: usize, ell: usize, eps: f64, m1: u64, m2: u64) -> Result<Self> {
        check_common(n, ell, eps)?;
        if m1 == 0 || m2 == 0 {
            return Err(Error::param("m1, m2", "both phases need at least one player"));
        }
        Ok(Self { n, ell, eps, m1, m2 })
    }

    /// `T = (m1 ell / n)(1 + eps^2/50)`.
    pub fn threshold(&self) -> f64 {
        (self.m1 * self.ell as u64) as f64 * (50.0 + self.eps * self.eps) / (50.0 * self.n as f64)
    }

    /// Phase 2 stops with Reject as soon as the running sum reaches this.
    pub fn running_sum_cutoff(&self) -> f64 {
        (self.ell as u64 * self.m2) as f64 * self.threshold()
    }

    /// Exact communication of phase 1.
    pub fn phase1_bits(&self) -> u64 {
        self.m1 * self.ell as u64 * element_bits(self.n)
    }

    /// Guarantee holds for `1/eps^6 <= m1 ell <= n^(9/10)`.
    pub fn unproven_regime(&self) -> bool {
        let s1 = (self.m1 * self.ell as u64) as f64;
        s1 < self.eps.powi(-6) || s1 > (self.n as f64).powf(0.9)
    }
}

impl Protocol for DistributedBipartite {
    fn n(&self) -> usize {
        self.n
    }

    fn ell(&self) -> usize {
        self.ell
    }

    fn execute(&self, session: &mut Session<'_>) -> Result<Outcome> {
        let width = element_bits(self.n) as u32;
        let mut multiplicity = vec![0u32; self.n + 1];
        for _ in 0..self.m1 {
            let player = session.next_player()?;
            let answer = session.query(&player, |pl| {
                let mut b = Bits::new();
                for &x in &pl.samples_p {
                    b.push_uint(x as u64 - 1, width);
                }
                b
            })?;
            let mut r = answer.reader();
            for _ in 0..self.ell {
                let x = r.read_uint(width)? as usize + 1;
                if x > self.n {
                    return Err(Error::OutOfDomain {
                        element: x as u64,
                        n: self.n,
                    });
                }
                multiplicity[x] += 1;
            }
        }
        let regime = self.unproven_regime();
        if multiplicity.iter().any(|&a| a as u64 > MAX_MULTIPLICITY) {
            return Ok(Outcome::new(Decision::Reject, regime));
        }

        // The multiplicity table is broadcast to phase-2 players for free.
        let cutoff = self.running_sum_cutoff();
        let mut running = 0u64;
        for _ in 0..self.m2 {
            let player = session.next_player()?;
            let answer = session.query(&player, |pl| {
                let b: u64 = pl.samples_p.iter().map(|&x| multiplicity[x as usize] as u64).sum();
                unary_encode(b)
            })?;
            running += unary_decode(&answer)?;
            if running as f64 >= cutoff {
                return Ok(Outcome::new(Decision::Reject, regime));
            }
        }
        Ok(Outcome::new(Decision::Accept, regime))
    }
}

pub fn distributed_bipartite_uniformity(players: PlayerSource, n: usize, ell: usize, eps: f64) -> Result<TestVerdict> {
    let protocol = DistributedBipartite::new(n, ell, eps)?;
    Ok(run_protocol(&protocol, players, Rng::new(0, 0))?.0)
}

/// Every queried player reports the number of colliding pairs among its own
/// samples; the referee averages the reports.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributedAggregate {
    pub n: usize,
    pub ell: usize,
    pub eps: f64,
    pub m: u64,
}

/// Player constant of the aggregate tester.
pub const AGGREGATE_PLAYERS: f64 = 12800.0;

impl DistributedAggregate {
    pub fn new(n: usize, ell: usize, eps: f64) -> Result<Self> {
        check_common(n, ell, eps)?;
        if ell < 2 {
            return Err(Error::param("ell", "a single sample has no internal collisions"));
        }
        let l = ell as f64;
        let m = (AGGREGATE_PLAYERS * n as f64 / (l * l * eps.powi(4))).ceil() as u64;
        Ok(Self { n, ell, eps, m })
    }

    pub fn pairs(&self) -> u64 {
        let l = self.ell as u64;
        l * (l - 1) / 2
    }

    /// `T = C(ell, 2)(2 + eps^2) / (2n)`.
    pub fn threshold(&self) -> f64 {
        self.pairs() as f64 * (2.0 + self.eps * self.eps) / (2.0 * self.n as f64)
    }

    /// Bits per answer: `ceil(log2(C(ell, 2) + 1))`.
    pub fn answer_width(&self) -> u32 {
        ceil_log2(self.pairs() + 1) as u32
    }

    /// Communication of every complete run.
    pub fn comm_bits(&self) -> u64 {
        self.m * self.answer_width() as u64
    }

    /// Guarantee holds for `ell <= 16 sqrt(n) / (3 eps^2)`.
    pub fn unproven_regime(&self) -> bool {
        self.ell as f64 > 16.0 * (self.n as f64).sqrt() / (3.0 * self.eps * self.eps)
    }
}

/// Colliding pairs within `samples`, using `seen` (length `n + 1`, all zero
/// on entry and on exit) as scratch.
fn pairwise_collisions(samples: &[Element], seen: &mut [u32]) -> u64 {
    let mut c = 0u64;
    for &x in samples {
        c += seen[x as usize] as u64;
        seen[x as usize] += 1;
    }
    for &x in samples {
        seen[x as usize] = 0;
    }
    c
}

impl Protocol for DistributedAggregate {
    fn n(&self) -> usize {
        self.n
    }

    fn ell(&self) -> usize {
        self.ell
    }

    fn execute(&self, session: &mut Session<'_>) -> Result<Outcome> {
        let width = self.answer_width();
        let mut seen = vec![0u32; self.n + 1];
        let mut sum = 0u64;
        for _ in 0..self.m {
            let player = session.next_player()?;
            let answer = session.query(&player, |pl| {
                let mut b = Bits::new();
                b.push_uint(pairwise_collisions(&pl.samples_p, &mut seen), width);
                b
            })?;
            sum += answer.reader().read_uint(width)?;
        }
        let z = sum as f64 / self.m as f64;
        let decision = if z >= self.threshold() {
            Decision::Reject
        } else {
            Decision::Accept
        };
        Ok(Outcome::new(decision, self.unproven_regime()))
    }
}

pub fn distributed_aggregate_uniformity(players: PlayerSource, n: usize, ell: usize, eps: f64) -> Result<TestVerdict> {
    let protocol = DistributedAggregate::new(n, ell, eps)?;
    Ok(run_protocol(&protocol, players, Rng::new(0, 0))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_uniform, paninski_with_signs, SampleMultiset};
    use crate::dist::count_pairwise_collisions;
    use crate::streaming::SampleStream;

    fn uniform_players(n: usize, ell: usize, seed: u64) -> PlayerSource {
        PlayerSource::uniformity(SampleStream::new(&make_uniform(n).unwrap(), Rng::new(seed, 0)), ell).unwrap()
    }

    #[test]
    fn aggregate_examples() {
        let a = DistributedAggregate::new(1000, 10, 0.5).unwrap();
        assert_eq!(a.threshold(), 0.050625);
        assert_eq!(a.answer_width(), 6);
        assert_eq!(DistributedAggregate::new(100, 4, 1.0).unwrap().m, 80000);
        assert!(DistributedAggregate::new(100, 1, 1.0).is_err());
    }

    #[test]
    fn collision_scratch_matches_multiset_count() {
        let mut seen = vec![0u32; 11];
        let s = [3, 3, 3, 7, 1, 7, 10];
        let expected = count_pairwise_collisions(&SampleMultiset::from_elements(10, &s).unwrap());
        assert_eq!(pairwise_collisions(&s, &mut seen), expected);
        assert_eq!(expected, 4);
        assert!(seen.iter().all(|&c| c == 0));
    }

    #[test]
    fn aggregate_comm_is_closed_form() {
        let proto = DistributedAggregate::new(64, 8, 1.0).unwrap();
        let (v, t) = run_protocol(&proto, uniform_players(64, 8, 3), Rng::new(0, 0)).unwrap();
        assert_eq!(v.comm_bits, Some(proto.m * 5));
        assert_eq!(t.len() as u64, proto.m);
        assert_eq!(v.samples_used, proto.m * 8);
    }

    #[test]
    fn bipartite_phase1_accounting() {
        let proto = DistributedBipartite::with_counts(256, 4, 0.5, 10, 50).unwrap();
        let (v, t) = run_protocol(&proto, uniform_players(256, 4, 1), Rng::new(0, 0)).unwrap();
        let phase1: u64 = t.entries().take(10).map(|(_, b)| b.len() as u64).sum();
        assert_eq!(phase1, proto.phase1_bits());
        assert_eq!(phase1, 10 * 4 * 8);
        let phase2: u64 = t.entries().skip(10).map(|(_, b)| unary_decode(&b).unwrap() + 1).sum();
        assert_eq!(v.comm_bits.unwrap(), phase1 + phase2);
    }

    #[test]
    fn bipartite_early_abort_stops_querying() {
        // Half the domain carries all the mass, so phase-2 counts run high.
        let n = 64;
        let mut mass = vec![0.0; n];
        for m in mass.iter_mut().take(n / 2) {
            *m = 2.0 / n as f64;
        }
        let p = crate::dist::DiscreteDistribution::new(mass).unwrap();
        let proto = DistributedBipartite::with_counts(n, 4, 1.0, 5, 1000).unwrap();
        let src = PlayerSource::uniformity(SampleStream::new(&p, Rng::new(2, 0)), 4).unwrap();
        let (v, t) = run_protocol(&proto, src, Rng::new(0, 0)).unwrap();
        assert_eq!(v.decision, Decision::Reject);
        assert!(t.len() < 5 + 1000);
        let running: u64 = t.entries().skip(5).map(|(_, b)| unary_decode(&b).unwrap()).sum();
        assert!(running as f64 >= proto.running_sum_cutoff());
        let before_last: u64 = t
            .entries()
            .skip(5)
            .take(t.len() - 6)
            .map(|(_, b)| unary_decode(&b).unwrap())
            .sum();
        assert!((before_last as f64) < proto.running_sum_cutoff());
    }

    #[test]
    fn bipartite_runs_out_of_players() {
        let proto = DistributedBipartite::with_counts(64, 2, 1.0, 3, 3).unwrap();
        let src = uniform_players(64, 2, 0).with_limit(4);
        assert_eq!(run_protocol(&proto, src, Rng::new(0, 0)).unwrap_err(), Error::InsufficientPlayers(4));
    }

    #[test]
    fn aggregate_separates_small_instance() {
        let n = 64;
        let proto = DistributedAggregate::new(n, 8, 1.0).unwrap();
        let signs: Vec<i8> = (0..n / 2).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let far = paninski_with_signs(1.0, &signs).unwrap().dist;
        let mut wrong = 0;
        for seed in 0..20 {
            let u = run_protocol(&proto, uniform_players(n, 8, seed), Rng::new(0, 0)).unwrap().0;
            let src = PlayerSource::uniformity(SampleStream::new(&far, Rng::new(seed, 1)), 8).unwrap();
            let f = run_protocol(&proto, src, Rng::new(0, 0)).unwrap().0;
            wrong += (!u.is_accept()) as u32 + f.is_accept() as u32;
        }
        assert!(wrong <= 4, "{wrong} errors in 40 runs");
    }
}
