//! Experiment configuration: typed fields, a flat `key = value` file format,
//! and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{ExpError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tester {
    CentralBipartite,
    StreamingUniformity,
    DistBipartite,
    DistAggregate,
    ClosenessMemory,
    ClosenessDistributed,
    /// The aggregate protocol run both directly and through the streaming
    /// adapter, cross-checked on every trial.
    AdapterCheck,
}

impl Tester {
    pub const ALL: [Tester; 7] = [
        Tester::CentralBipartite,
        Tester::StreamingUniformity,
        Tester::DistBipartite,
        Tester::DistAggregate,
        Tester::ClosenessMemory,
        Tester::ClosenessDistributed,
        Tester::AdapterCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tester::CentralBipartite => "central-bipartite",
            Tester::StreamingUniformity => "streaming-uniformity",
            Tester::DistBipartite => "dist-bipartite",
            Tester::DistAggregate => "dist-aggregate",
            Tester::ClosenessMemory => "closeness-memory",
            Tester::ClosenessDistributed => "closeness-distributed",
            Tester::AdapterCheck => "adapter-check",
        }
    }

    pub fn is_closeness(self) -> bool {
        matches!(self, Tester::ClosenessMemory | Tester::ClosenessDistributed)
    }

    fn needs_ell(self) -> bool {
        matches!(
            self,
            Tester::DistBipartite | Tester::DistAggregate | Tester::ClosenessDistributed | Tester::AdapterCheck
        )
    }
}

impl fmt::Display for Tester {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tester {
    type Err = ExpError;

    fn from_str(s: &str) -> Result<Self> {
        Tester::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| ExpError::Usage(format!("unknown tester `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instance {
    Uniform,
    /// Paired bins with fresh random signs on every trial.
    Paninski,
    DisjointHalves,
    /// Zipf with exponent 1.
    Zipf,
    /// One probability per line.
    CustomFile(PathBuf),
}

impl Instance {
    pub fn name(&self) -> &'static str {
        match self {
            Instance::Uniform => "uniform",
            Instance::Paninski => "paninski",
            Instance::DisjointHalves => "disjoint-halves",
            Instance::Zipf => "zipf",
            Instance::CustomFile(_) => "custom-file",
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub tester: Tester,
    pub n: usize,
    pub eps: f64,
    pub ell: Option<usize>,
    pub mem_bits: Option<u64>,
    pub buckets: Option<usize>,
    /// Total samples for the bipartite testers; overrides the default size.
    pub samples: Option<u64>,
    pub trials: u64,
    pub seed: u64,
    pub instance: Instance,
    pub jobs: usize,
}

/// Keys understood in config files and as overrides. `out` is accepted and
/// ignored here; the CLI consumes it.
pub const KEYS: [&str; 13] = [
    "tester",
    "n",
    "eps",
    "ell",
    "mem-bits",
    "buckets",
    "samples",
    "trials",
    "seed",
    "instance",
    "instance-file",
    "jobs",
    "out",
];

/// Untyped `key -> value` map, in file or flag form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('_', "-")
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ExpError::Usage(format!("config line {}: expected `key = value`", lineno + 1))
            })?;
            raw.set(k, v.trim())?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExpError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(ExpError::Usage(format!("unknown key `{key}`")));
        }
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize_key(key)).map(String::as_str)
    }

    /// Values in `other` win.
    pub fn merged(mut self, other: &RawConfig) -> Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let required = |k: &str| {
            self.get(k)
                .ok_or_else(|| ExpError::Usage(format!("missing required field `{k}`")))
        };
        let tester: Tester = required("tester")?.parse()?;
        let instance = match required("instance")? {
            "uniform" => Instance::Uniform,
            "paninski" => Instance::Paninski,
            "disjoint-halves" => Instance::DisjointHalves,
            "zipf" => Instance::Zipf,
            "custom-file" => Instance::CustomFile(PathBuf::from(self.get("instance-file").ok_or_else(
                || ExpError::Usage("instance custom-file needs `instance-file`".into()),
            )?)),
            other => return Err(ExpError::Usage(format!("unknown instance `{other}`"))),
        };
        let config = ExperimentConfig {
            tester,
            n: parse_int(required("n")?, "n")? as usize,
            eps: parse_float(required("eps")?, "eps")?,
            ell: self.get("ell").map(|v| parse_int(v, "ell")).transpose()?.map(|v| v as usize),
            mem_bits: self.get("mem-bits").map(|v| parse_int(v, "mem-bits")).transpose()?,
            buckets: self.get("buckets").map(|v| parse_int(v, "buckets")).transpose()?.map(|v| v as usize),
            samples: self.get("samples").map(|v| parse_int(v, "samples")).transpose()?,
            trials: parse_int(self.get("trials").unwrap_or("400"), "trials")?,
            seed: parse_int(self.get("seed").unwrap_or("0"), "seed")?,
            instance,
            jobs: parse_int(self.get("jobs").unwrap_or("1"), "jobs")? as usize,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Decimal integer, or `a^b`.
pub fn parse_int(s: &str, key: &str) -> Result<u64> {
    let bad = || ExpError::Usage(format!("`{key}`: `{s}` is not a non-negative integer"));
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let base: u64 = base.trim().parse().map_err(|_| bad())?;
        let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
        return base.checked_pow(exp).ok_or_else(bad);
    }
    s.parse().map_err(|_| bad())
}

pub fn parse_float(s: &str, key: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ExpError::Usage(format!("`{key}`: `{s}` is not a number")))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(ExpError::Usage(m));
        if self.n < 2 {
            return usage(format!("n = {} is too small", self.n));
        }
        if !(self.eps > 0.0 && self.eps <= 2.0) {
            return usage(format!("eps = {} is outside (0, 2]", self.eps));
        }
        if self.trials == 0 {
            return usage("trials must be at least 1".into());
        }
        if self.jobs == 0 {
            return usage("jobs must be at least 1".into());
        }
        if self.tester.needs_ell() && self.ell.is_none_or(|l| l == 0) {
            return usage(format!("tester {} needs ell >= 1", self.tester));
        }
        if self.tester == Tester::StreamingUniformity && self.mem_bits.is_none() {
            return usage("tester streaming-uniformity needs mem-bits".into());
        }
        if self.tester == Tester::ClosenessMemory && self.buckets.is_none_or(|b| b == 0) {
            return usage("tester closeness-memory needs buckets >= 1".into());
        }
        if self.samples.is_some()
            && !matches!(self.tester, Tester::CentralBipartite | Tester::StreamingUniformity)
        {
            return usage(format!("samples applies only to the bipartite testers, not {}", self.tester));
        }
        if matches!(self.instance, Instance::Paninski | Instance::DisjointHalves) && self.n % 2 != 0 {
            return usage(format!("instance {} needs an even n", self.instance));
        }
        if self.instance == Instance::Paninski && self.eps > 1.0 {
            return usage("the paired-bin instance needs eps <= 1".into());
        }
        Ok(())
    }

    /// Applies one `key = value` override and revalidates.
    pub fn with(&self, key: &str, value: &str) -> Result<Self> {
        self.to_raw().merged(&{
            let mut r = RawConfig::new();
            r.set(key, value)?;
            r
        })
        .to_config()
    }

    pub fn to_raw(&self) -> RawConfig {
        let mut r = RawConfig::new();
        let mut put = |k: &str, v: String| {
            r.values.insert(k.to_string(), v);
        };
        put("tester", self.tester.to_string());
        put("n", self.n.to_string());
        put("eps", self.eps.to_string());
        if let Some(v) = self.ell {
            put("ell", v.to_string());
        }
        if let Some(v) = self.mem_bits {
            put("mem-bits", v.to_string());
        }
        if let Some(v) = self.buckets {
            put("buckets", v.to_string());
        }
        if let Some(v) = self.samples {
            put("samples", v.to_string());
        }
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        put("instance", self.instance.to_string());
        if let Instance::CustomFile(p) = &self.instance {
            put("instance-file", p.display().to_string());
        }
        put("jobs", self.jobs.to_string());
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = "
# streaming run
tester = streaming-uniformity
n = 2^14
eps = 0.5
mem_bits = 4096   # underscores are fine
trials = 20
seed = 7
instance = uniform
";

    #[test]
    fn file_parses() {
        let c = RawConfig::parse(FILE).unwrap().to_config().unwrap();
        assert_eq!(c.tester, Tester::StreamingUniformity);
        assert_eq!(c.n, 16384);
        assert_eq!(c.mem_bits, Some(4096));
        assert_eq!(c.jobs, 1);
    }

    #[test]
    fn flags_override_file() {
        let file = RawConfig::parse(FILE).unwrap();
        let mut flags = RawConfig::new();
        flags.set("trials", "3").unwrap();
        let c = file.merged(&flags).to_config().unwrap();
        assert_eq!(c.trials, 3);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn round_trip_through_raw() {
        let c = RawConfig::parse(FILE).unwrap().to_config().unwrap();
        assert_eq!(c.to_raw().to_config().unwrap(), c);
        assert_eq!(c.with("mem-bits", "2^10").unwrap().mem_bits, Some(1024));
    }

    #[test]
    fn invalid_configs() {
        let base = RawConfig::parse(FILE).unwrap();
        for (k, v) in [
            ("trials", "0"),
            ("eps", "3"),
            ("tester", "dist-aggregate"),
            ("instance", "nope"),
            ("n", "abc"),
            ("instance", "custom-file"),
        ] {
            let mut o = RawConfig::new();
            o.set(k, v).unwrap();
            assert!(
                matches!(base.clone().merged(&o).to_config(), Err(ExpError::Usage(_))),
                "{k} = {v}"
            );
        }
        assert!(RawConfig::parse("bogus = 1").is_err());
        assert!(RawConfig::parse("tester").is_err());
    }
}
