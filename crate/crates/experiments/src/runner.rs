//! Seeded Monte-Carlo trials.

use rayon::prelude::*;

use ptlab_core::comm::{
    protocol_to_stream, run_protocol, DistributedAggregate, DistributedBipartite, DistributedCloseness,
    PlayerSource,
};
use ptlab_core::rng::trial_stream;
use ptlab_core::streaming::{
    bipartite_collision_uniformity, bipartite_default_n2, closeness_memory, streaming_uniformity_with,
    ClosenessMemoryParams, MemoryLedger, SampleStream, StreamingUniformityParams,
};
use ptlab_core::{constants, Rng, TestVerdict};

use crate::config::{ExperimentConfig, Tester};
use crate::error::{ExpError, Result};
use crate::instance::PreparedInstance;
use crate::report::{TrialOutcome, TrialReport};

/// Per-trial RNG purposes.
const INSTANCE: u8 = 0;
const STREAM_P: u8 = 1;
const STREAM_Q: u8 = 2;
const COINS: u8 = 3;

/// First-set size of the centralized bipartite tester:
/// `min(sqrt(K n) / eps^2, n^0.9)`.
pub fn central_n1(n: usize, eps: f64) -> u64 {
    let balanced = (constants::BIPARTITE_N2 * n as f64).sqrt() / (eps * eps);
    balanced.min((n as f64).powf(0.9)).floor().max(1.0) as u64
}

fn runtime(trial: u64) -> impl Fn(ptlab_core::Error) -> ExpError {
    move |source| ExpError::Runtime { trial, source }
}

/// Runs trial `trial` of `config`.
pub fn run_one(config: &ExperimentConfig, prepared: &PreparedInstance, trial: u64) -> Result<TrialOutcome> {
    let rng = |purpose| Rng::new(config.seed, trial_stream(trial, purpose));
    let input = prepared.for_trial(&mut rng(INSTANCE))?;
    let err = runtime(trial);
    let stream_p = SampleStream::from_sampler(input.p.clone(), rng(STREAM_P));
    let stream_q = input.q.clone().map(|q| SampleStream::from_sampler(q, rng(STREAM_Q)));
    let (n, eps) = (config.n, config.eps);
    let ell = config.ell.unwrap_or(0);

    let verdict: TestVerdict = match config.tester {
        Tester::CentralBipartite => {
            let n1 = central_n1(n, eps);
            let n2 = match config.samples {
                Some(total) if total > n1 => total - n1,
                Some(total) => {
                    return Err(ExpError::Usage(format!("samples = {total} must exceed N1 = {n1}")));
                }
                None => bipartite_default_n2(n, eps, n1),
            };
            let mut s = stream_p;
            bipartite_collision_uniformity(&mut s, n, eps, n1, n2).map_err(err)?
        }
        Tester::StreamingUniformity => {
            let m = config.mem_bits.expect("validated");
            let mut params = StreamingUniformityParams::new(n, m, eps).map_err(|e| ExpError::Usage(e.to_string()))?;
            if let Some(total) = config.samples {
                params = params
                    .with_total_samples(total)
                    .map_err(|e| ExpError::Usage(e.to_string()))?;
            }
            let mut ledger = MemoryLedger::with_budget(m);
            let mut s = stream_p;
            let v = streaming_uniformity_with(&mut s, &params, &mut ledger).map_err(err)?;
            if ledger.peak_bits() > m {
                return Err(ExpError::Check(format!(
                    "trial {trial}: peak {} bits over the {m}-bit budget",
                    ledger.peak_bits()
                )));
            }
            v
        }
        Tester::DistBipartite => {
            let proto = DistributedBipartite::new(n, ell, eps).map_err(|e| ExpError::Usage(e.to_string()))?;
            let players = PlayerSource::uniformity(stream_p, ell).map_err(&err)?;
            run_protocol(&proto, players, rng(COINS)).map_err(err)?.0
        }
        Tester::DistAggregate => {
            let proto = DistributedAggregate::new(n, ell, eps).map_err(|e| ExpError::Usage(e.to_string()))?;
            let players = PlayerSource::uniformity(stream_p, ell).map_err(&err)?;
            run_protocol(&proto, players, rng(COINS)).map_err(err)?.0
        }
        Tester::ClosenessMemory => {
            let params = ClosenessMemoryParams::new(n, config.buckets.expect("validated"), eps)
                .map_err(|e| ExpError::Usage(e.to_string()))?;
            let (mut sp, mut sq) = (stream_p, stream_q.expect("closeness instance"));
            let mut ledger = MemoryLedger::new();
            closeness_memory(&mut sp, &mut sq, &params, &mut ledger, &mut rng(COINS)).map_err(err)?
        }
        Tester::ClosenessDistributed => {
            let proto = DistributedCloseness::new(n, ell, eps).map_err(|e| ExpError::Usage(e.to_string()))?;
            let players =
                PlayerSource::closeness(stream_p, stream_q.expect("closeness instance"), ell).map_err(&err)?;
            let v = run_protocol(&proto, players, rng(COINS)).map_err(err)?.0;
            if v.comm_bits.unwrap_or(0) > proto.cap_bits() {
                return Err(ExpError::Check(format!("trial {trial}: communication over the cap")));
            }
            v
        }
        Tester::AdapterCheck => adapter_trial(config, trial, &input.p, rng)?,
    };
    Ok(TrialOutcome {
        decision: verdict.decision,
        expected: input.expected,
        samples: verdict.samples_used,
        peak_bits: verdict.peak_memory_bits,
        comm_bits: verdict.comm_bits,
        aborted: verdict.aborted,
        unproven_regime: verdict.unproven_regime,
    })
}

/// Runs the aggregate protocol directly and through the streaming adapter on
/// the same seeds, and fails unless the two agree and the adapter stays
/// within `|T| + ell ceil(log2 n)` bits and `|T| ell` samples.
fn adapter_trial(
    config: &ExperimentConfig,
    trial: u64,
    p: &ptlab_core::dist::Sampler,
    rng: impl Fn(u8) -> Rng,
) -> Result<TestVerdict> {
    let err = runtime(trial);
    let ell = config.ell.expect("validated");
    let proto = DistributedAggregate::new(config.n, ell, config.eps).map_err(|e| ExpError::Usage(e.to_string()))?;
    let stream = || SampleStream::from_sampler(p.clone(), rng(STREAM_P));
    let players = PlayerSource::uniformity(stream(), ell).map_err(&err)?;
    let (direct, direct_t) = run_protocol(&proto, players, rng(COINS)).map_err(&err)?;
    let mut ledger = MemoryLedger::new();
    let adapter = protocol_to_stream(&proto);
    let (streamed, streamed_t) = adapter.run(stream(), None, &mut ledger, rng(COINS)).map_err(&err)?;
    let check = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(ExpError::Check(format!("trial {trial}: {what}")))
        }
    };
    let t = streamed_t.total_bits();
    check(direct.decision == streamed.decision, "adapter verdict differs from direct run")?;
    check(direct_t == streamed_t, "adapter transcript differs from direct run")?;
    check(ledger.peak_bits() <= adapter.memory_bound(t), "adapter memory over |T| + ell log n")?;
    check(streamed.samples_used <= t * ell as u64, "adapter consumed more than |T| ell samples")?;
    Ok(streamed)
}

/// Runs `config.trials` independent trials on up to `config.jobs` threads.
///
/// Trial `t` draws everything from substreams of `config.seed` indexed by
/// `t`, so the report is the same for any job count.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialReport> {
    config.validate()?;
    let prepared = PreparedInstance::new(config)?;
    let outcomes: Vec<TrialOutcome> = if config.jobs == 1 {
        (0..config.trials)
            .map(|t| run_one(config, &prepared, t))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| ExpError::Usage(format!("cannot start {} jobs: {e}", config.jobs)))?;
        pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|t| run_one(config, &prepared, t))
                .collect::<Result<_>>()
        })?
    };
    let expected = outcomes[0].expected;
    Ok(TrialReport::aggregate(config, expected, &outcomes))
}
