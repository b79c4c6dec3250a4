//! Distributed closeness testing.
//!
//! Players hold `ell` samples of each of `p` and `q`. The referee builds a
//! flattening from a few revealed samples, picks a random subset `W` of the
//! flattened domain, and collects from many machines only the samples that
//! land in `W`. The two conditional distributions on `W` are then compared
//! with the l2 statistic after a second flattening.

use crate::comm::bits::Bits;
use crate::comm::players::PlayerSource;
use crate::comm::protocol::{run_protocol, Outcome, Protocol};
use crate::comm::session::Session;
use crate::constants;
use crate::dist::Element;
use crate::error::{Error, Result};
use crate::flatten::{build_flattener_from_elements, flatten_sample, Flattener};
use crate::hashing::ceil_log2;
use crate::l2::{estimate_l2_sq_fixed, null_std_fixed, BucketCounts};
use crate::rng::Rng;
use crate::streaming::element_bits;
use crate::verdict::{Decision, TestVerdict};

#[derive(Clone, Debug, PartialEq)]
pub struct DistributedCloseness {
    pub n: usize,
    pub ell: usize,
    pub eps: f64,
    /// The shared constant `C`.
    pub c: f64,
    /// The final statistic must clear this many null standard deviations.
    pub noise_z: f64,
}

impl DistributedCloseness {
    pub fn new(n: usize, ell: usize, eps: f64) -> Result<Self> {
        Self::with_constants(n, ell, eps, constants::DIST_CLOSENESS_C, constants::DIST_CLOSENESS_NOISE_Z)
    }

    pub fn with_constants(n: usize, ell: usize, eps: f64, c: f64, noise_z: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDomain(n));
        }
        if ell == 0 {
            return Err(Error::param("ell", "must be at least 1"));
        }
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(Error::param("eps", format!("{eps} is outside (0, 2]")));
        }
        if !(c >= 1.0) || !(noise_z >= 0.0) {
            return Err(Error::param("c, noise_z", "need c >= 1 and noise_z >= 0"));
        }
        Ok(Self { n, ell, eps, c, noise_z })
    }

    fn log_n(&self) -> f64 {
        (self.n as f64).log2()
    }

    /// Communication cap `C^2 (n log n)^(2/3) / (ell^(2/3) eps^(4/3))`.
    pub fn cap_bits(&self) -> u64 {
        let n = self.n as f64;
        (self.c * self.c * (n * self.log_n()).powf(2.0 / 3.0)
            / ((self.ell as f64).powf(2.0 / 3.0) * self.eps.powf(4.0 / 3.0)))
        .floor() as u64
    }

    /// Flattening samples per side: `ceil(C ell log n / eps)`.
    pub fn flatten_samples(&self) -> u64 {
        (self.c * self.ell as f64 * self.log_n() / self.eps).ceil() as u64
    }

    /// Each flattened element joins `W` with probability `1 / (ell log n)`.
    pub fn inclusion_rate(&self) -> f64 {
        (1.0 / (self.ell as f64 * self.log_n())).min(1.0)
    }

    /// Machines queried for samples in `W`: `ceil(C log n |W|^(2/3) / eps^(4/3))`.
    pub fn machines(&self, w: usize) -> u64 {
        (self.c * self.log_n() * (w as f64).powf(2.0 / 3.0) / self.eps.powf(4.0 / 3.0)).ceil() as u64
    }

    /// Minimum `p`-side count in `W`: `|W|^(2/3) C^(2/3) / eps^(4/3)`.
    pub fn min_w_samples(&self, w: usize) -> f64 {
        ((w as f64) * self.c).powf(2.0 / 3.0) / self.eps.powf(4.0 / 3.0)
    }

    /// Guarantee holds for `ell <= n eps^4 / log n`.
    pub fn unproven_regime(&self) -> bool {
        self.ell as f64 > self.n as f64 * self.eps.powi(4) / self.log_n()
    }
}

enum Step<T> {
    Continue(T),
    Abort,
}

impl DistributedCloseness {
    /// Players reveal flattening samples until `N` of each side are known.
    fn collect_flattening(&self, session: &mut Session<'_>, cap: u64) -> Result<Step<Flattener>> {
        let width = element_bits(self.n) as u32;
        let target = self.flatten_samples() as usize;
        let mut revealed: Vec<Element> = Vec::with_capacity(2 * target);
        let (mut have_p, mut have_q) = (0usize, 0usize);
        while have_p < target || have_q < target {
            let player = session.next_player()?;
            let kp = (target - have_p).min(self.ell);
            let kq = (target - have_q).min(self.ell);
            let answer = session.query_within(Some(cap), &player, |pl| {
                let mut b = Bits::new();
                for &x in pl.samples_p[..kp].iter().chain(&pl.samples_q()[..kq]) {
                    b.push_uint(x as u64 - 1, width);
                }
                b
            })?;
            let Some(answer) = answer else {
                return Ok(Step::Abort);
            };
            let mut r = answer.reader();
            for _ in 0..kp + kq {
                let x = r.read_uint(width)? as usize + 1;
                if x > self.n {
                    return Err(Error::OutOfDomain {
                        element: x as u64,
                        n: self.n,
                    });
                }
                revealed.push(x as Element);
            }
            have_p += kp;
            have_q += kq;
        }
        Ok(Step::Continue(build_flattener_from_elements(&revealed, self.n)?))
    }

    /// Each machine reports, for every sample whose flattened image lies in
    /// `W`, a continuation bit, a side bit and the index in `W`; a final 0
    /// ends the list.
    fn collect_w_samples(
        &self,
        session: &mut Session<'_>,
        cap: u64,
        flattener: &Flattener,
        w_index: &[u32],
        w_len: usize,
    ) -> Result<Step<(Vec<u32>, Vec<u32>)>> {
        let width = element_bits(self.n).max(ceil_log2(w_len as u64)) as u32;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for _ in 0..self.machines(w_len) {
            let player = session.next_player()?;
            let answer = session.query_within(Some(cap), &player, |pl| {
                let mut coins = pl.coins();
                let mut b = Bits::new();
                let sides = [(false, &pl.samples_p[..]), (true, pl.samples_q())];
                for (side, samples) in sides {
                    for &x in samples {
                        let y = flatten_sample(x, flattener, &mut coins).expect("samples lie in [n]");
                        let idx = w_index[y as usize];
                        if idx != u32::MAX {
                            b.push(true);
                            b.push(side);
                            b.push_uint(idx as u64, width);
                        }
                    }
                }
                b.push(false);
                b
            })?;
            let Some(answer) = answer else {
                return Ok(Step::Abort);
            };
            let mut r = answer.reader();
            while r.read_bit()? {
                let side = r.read_bit()?;
                let idx = r.read_uint(width)? as u32;
                if idx as usize >= w_len {
                    return Err(Error::MalformedCodeword(format!("W index {idx} >= |W| = {w_len}")));
                }
                if side { ys.push(idx) } else { xs.push(idx) }
            }
        }
        Ok(Step::Continue((xs, ys)))
    }

    /// l2 test of the two conditional distributions on `W` at distance
    /// `eps / sqrt(C)`, after flattening `W` with a quarter of the samples.
    fn final_test(&self, xs: &[u32], ys: &[u32], w_len: usize, coins: &mut Rng) -> Result<Decision> {
        let k = xs.len().min(ys.len()) / 4;
        let to_elem = |v: &[u32]| v.iter().map(|&i| i + 1).collect::<Vec<Element>>();
        let mut split: Vec<Element> = to_elem(&xs[..k]);
        split.extend(to_elem(&ys[..k]));
        let f = build_flattener_from_elements(&split, w_len)?;
        let d = f.new_n();
        let mut x_counts = vec![0u64; d];
        let mut y_counts = vec![0u64; d];
        for &i in &xs[k..] {
            x_counts[flatten_sample(i + 1, &f, coins)? as usize - 1] += 1;
        }
        for &i in &ys[k..] {
            y_counts[flatten_sample(i + 1, &f, coins)? as usize - 1] += 1;
        }
        let n_param = (xs.len() - k) as f64;
        let counts = BucketCounts::new(x_counts, y_counts, n_param)?;
        let estimate = estimate_l2_sq_fixed(&counts)?;
        let tau = self.eps / self.c.sqrt() / (d as f64).sqrt();
        let cutoff = (tau * tau / 2.0).max(self.noise_z * null_std_fixed(&counts));
        Ok(crate::l2::decide(estimate, cutoff))
    }
}

impl Protocol for DistributedCloseness {
    fn n(&self) -> usize {
        self.n
    }

    fn ell(&self) -> usize {
        self.ell
    }

    fn is_closeness(&self) -> bool {
        true
    }

    fn execute(&self, session: &mut Session<'_>) -> Result<Outcome> {
        let regime = self.unproven_regime();
        let cap = self.cap_bits();
        let aborted = || Outcome {
            decision: Decision::Reject,
            aborted: true,
            unproven_regime: regime,
        };
        let reject = Outcome::new(Decision::Reject, regime);

        let flattener = match self.collect_flattening(session, cap)? {
            Step::Continue(f) => f,
            Step::Abort => return Ok(aborted()),
        };

        // W is chosen with the referee's coins and broadcast for free.
        let rate = self.inclusion_rate();
        let mut w_index = vec![u32::MAX; flattener.new_n() + 1];
        let mut w_len = 0usize;
        for slot in w_index.iter_mut().skip(1) {
            if session.coins().bernoulli(rate) {
                *slot = w_len as u32;
                w_len += 1;
            }
        }

        let (xs, ys) = match self.collect_w_samples(session, cap, &flattener, &w_index, w_len)? {
            Step::Continue(v) => v,
            Step::Abort => return Ok(aborted()),
        };

        let (m1, m2) = (xs.len() as f64, ys.len() as f64);
        if (m1 - m2).abs() >= self.c * m1.sqrt() || m1 <= self.min_w_samples(w_len) {
            return Ok(reject);
        }
        if xs.len().min(ys.len()) < 8 {
            return Ok(reject);
        }
        let decision = self.final_test(&xs, &ys, w_len, session.coins())?;
        Ok(Outcome::new(decision, regime))
    }
}

pub fn distributed_closeness(
    players: PlayerSource,
    n: usize,
    ell: usize,
    eps: f64,
    coins: Rng,
) -> Result<TestVerdict> {
    let protocol = DistributedCloseness::new(n, ell, eps)?;
    Ok(run_protocol(&protocol, players, coins)?.0)
}
