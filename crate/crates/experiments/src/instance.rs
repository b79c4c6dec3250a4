//! Input distributions for trials.

use std::path::Path;

use ptlab_core::dist::{
    lp_distance, make_disjoint_halves, make_paninski_instance, make_uniform, make_zipf, DiscreteDistribution,
    Sampler,
};
use ptlab_core::{Decision, Rng};

use crate::config::{ExperimentConfig, Instance};
use crate::error::{ExpError, Result};

/// Tolerance on the total mass of a custom-file distribution.
pub const CUSTOM_SUM_TOLERANCE: f64 = 1e-9;

/// Reads one probability per line (blank lines and `#` comments skipped).
pub fn load_custom(path: &Path) -> Result<DiscreteDistribution> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExpError::Usage(format!("cannot read instance file {}: {e}", path.display())))?;
    let mut mass = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| ExpError::Usage(format!("{}:{}: `{line}` is not a number", path.display(), i + 1)))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(ExpError::Usage(format!("{}:{}: negative or non-finite mass", path.display(), i + 1)));
        }
        mass.push(v);
    }
    let sum: f64 = mass.iter().sum();
    if (sum - 1.0).abs() > CUSTOM_SUM_TOLERANCE {
        return Err(ExpError::Usage(format!(
            "{}: probabilities sum to {sum}, not 1 within {CUSTOM_SUM_TOLERANCE}",
            path.display()
        )));
    }
    DiscreteDistribution::from_weights(&mass).map_err(|e| ExpError::Usage(e.to_string()))
}

/// Samplers for one trial and the answer a correct tester gives.
#[derive(Clone, Debug)]
pub struct TrialInput {
    pub p: Sampler,
    /// Second distribution, for closeness testers.
    pub q: Option<Sampler>,
    pub expected: Decision,
}

/// Everything about the instance that does not change between trials.
#[derive(Clone, Debug)]
pub struct PreparedInstance {
    fixed: Option<TrialInput>,
    n: usize,
    eps: f64,
    closeness: bool,
}

impl PreparedInstance {
    /// Uniformity testers see `p` alone and must accept only the uniform
    /// distribution. Closeness testers see a pair: equal pairs for the uniform,
    /// Zipf and custom instances, (paired-bin, uniform) and the two disjoint
    /// halves for the far ones.
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let n = config.n;
        let closeness = config.tester.is_closeness();
        let core = |e: ptlab_core::Error| ExpError::Usage(e.to_string());
        let uniform = || make_uniform(n).map_err(core);
        let fixed = match &config.instance {
            Instance::Paninski => None,
            Instance::Uniform => {
                let u = uniform()?.sampler();
                Some(TrialInput {
                    q: closeness.then(|| u.clone()),
                    p: u,
                    expected: Decision::Accept,
                })
            }
            Instance::DisjointHalves => {
                let (a, b) = make_disjoint_halves(n).map_err(core)?;
                Some(TrialInput {
                    p: a.sampler(),
                    q: closeness.then(|| b.sampler()),
                    expected: Decision::Reject,
                })
            }
            Instance::Zipf | Instance::CustomFile(_) => {
                let d = match &config.instance {
                    Instance::Zipf => make_zipf(n, 1.0).map_err(core)?,
                    Instance::CustomFile(path) => load_custom(path)?,
                    _ => unreachable!(),
                };
                if d.n() != n {
                    return Err(ExpError::Usage(format!(
                        "instance file has {} entries but n = {n}",
                        d.n()
                    )));
                }
                let expected = if closeness || lp_distance(&d, &uniform()?, 1).map_err(core)? <= 1e-9 {
                    Decision::Accept
                } else {
                    Decision::Reject
                };
                let s = d.sampler();
                Some(TrialInput {
                    q: closeness.then(|| s.clone()),
                    p: s,
                    expected,
                })
            }
        };
        Ok(Self {
            fixed,
            n,
            eps: config.eps,
            closeness,
        })
    }

    pub fn for_trial(&self, rng: &mut Rng) -> Result<TrialInput> {
        if let Some(f) = &self.fixed {
            return Ok(f.clone());
        }
        let inst = make_paninski_instance(self.n / 2, self.eps, rng).map_err(|e| ExpError::Usage(e.to_string()))?;
        let q = if self.closeness {
            Some(make_uniform(self.n).map_err(|e| ExpError::Usage(e.to_string()))?.sampler())
        } else {
            None
        };
        Ok(TrialInput {
            p: inst.dist.sampler(),
            q,
            expected: Decision::Reject,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn custom_file_validation() {
        let mut good = tempfile::NamedTempFile::new().unwrap();
        writeln!(good, "0.25\n0.25\n# comment\n0.5").unwrap();
        assert_eq!(load_custom(good.path()).unwrap().n(), 3);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0.25\n0.25\n0.4999999").unwrap();
        assert!(matches!(load_custom(bad.path()), Err(ExpError::Usage(_))));

        let mut close = tempfile::NamedTempFile::new().unwrap();
        writeln!(close, "0.5\n0.5000000000001").unwrap();
        assert!(load_custom(close.path()).is_ok());
    }
}
