//! Two-parameter sweeps and their CSV form.

use std::io::Write;

use crate::config::{parse_float, parse_int, ExperimentConfig, KEYS};
use crate::error::{ExpError, Result};
use crate::report::TrialReport;
use crate::runner::run_trials;

pub const CSV_HEADER: [&str; 19] = [
    "tester",
    "n",
    "eps",
    "ell",
    "mem_bits",
    "buckets",
    "trials",
    "seed",
    "instance",
    "accepts",
    "rejects",
    "err_rate",
    "err_lo",
    "err_hi",
    "mean_samples",
    "mean_peak_bits",
    "mean_comm_bits",
    "max_comm_bits",
    "is_reliable",
];

/// One axis of a grid: a config key and the values it takes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

impl Sweep {
    pub fn new(key: &str, values: &[&str]) -> Result<Self> {
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) || matches!(key.as_str(), "out" | "jobs") {
            return Err(ExpError::Usage(format!("cannot sweep `{key}`")));
        }
        if values.is_empty() {
            return Err(ExpError::Usage(format!("sweep over `{key}` has no values")));
        }
        let values: Vec<String> = values.iter().map(|v| v.trim().to_string()).collect();
        for v in &values {
            if key == "eps" {
                parse_float(v, &key)?;
            } else if !matches!(key.as_str(), "tester" | "instance" | "instance-file") {
                parse_int(v, &key)?;
            }
        }
        Ok(Self { key, values })
    }

    /// Parses `key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, list) = spec
            .split_once('=')
            .ok_or_else(|| ExpError::Usage(format!("sweep `{spec}` is not `key=v1,v2,...`")))?;
        let values: Vec<&str> = list.split(',').filter(|v| !v.trim().is_empty()).collect();
        Self::new(key, &values)
    }
}

/// Runs one report per `(axis1, axis2)` cell, `axis1` outermost.
pub fn tradeoff_grid(base: &ExperimentConfig, axis1: &Sweep, axis2: &Sweep) -> Result<Vec<TrialReport>> {
    let mut out = Vec::with_capacity(axis1.values.len() * axis2.values.len());
    for a in &axis1.values {
        for b in &axis2.values {
            let cell = base.with(&axis1.key, a)?.with(&axis2.key, b)?;
            out.push(run_trials(&cell)?);
        }
    }
    Ok(out)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.3}"))
}

pub fn csv_record(r: &TrialReport) -> Vec<String> {
    vec![
        r.tester.to_string(),
        r.n.to_string(),
        r.eps.to_string(),
        opt(r.ell),
        opt(r.mem_bits),
        opt(r.buckets),
        r.trials.to_string(),
        r.seed.to_string(),
        r.instance.to_string(),
        r.accepts.to_string(),
        r.rejects.to_string(),
        format!("{:.6}", r.err_rate),
        format!("{:.6}", r.err_lo),
        format!("{:.6}", r.err_hi),
        format!("{:.3}", r.mean_samples),
        opt_f(r.mean_peak_bits),
        opt_f(r.mean_comm_bits),
        opt(r.max_comm_bits),
        r.is_reliable().to_string(),
    ]
}

pub fn write_csv<W: Write>(reports: &[TrialReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(csv_record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(reports: &[TrialReport]) -> String {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Reference trade-off curves `k * m = c` for a resource axis.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceCurve {
    pub name: &'static str,
    /// The product `k * m`.
    pub product: f64,
}

/// `k m = n / eps^2` and `k m = n log2(n) / eps^4`.
pub fn reference_curves(n: usize, eps: f64) -> [ReferenceCurve; 2] {
    let n = n as f64;
    [
        ReferenceCurve {
            name: "n/eps^2",
            product: n / (eps * eps),
        },
        ReferenceCurve {
            name: "n log n/eps^4",
            product: n * n.log2() / eps.powi(4),
        },
    ]
}

/// Points of both reference curves at each resource value.
pub fn write_reference_csv<W: Write>(n: usize, eps: f64, resources: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["curve", "resource", "samples"])?;
    for c in reference_curves(n, eps) {
        for &m in resources {
            w.write_record([c.name.to_string(), format!("{m}"), format!("{:.3}", c.product / m)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("mem_bits=2^10, 2048 ,4096").unwrap();
        assert_eq!(s.key, "mem-bits");
        assert_eq!(s.values, ["2^10", "2048", "4096"]);
        assert!(Sweep::parse("mem-bits=").is_err());
        assert!(Sweep::parse("colour=1").is_err());
        assert!(Sweep::parse("eps=x").is_err());
        assert!(Sweep::parse("jobs=2").is_err());
    }

    #[test]
    fn reference_products() {
        let [a, b] = reference_curves(1 << 14, 0.5);
        assert_eq!(a.product, 65536.0);
        assert_eq!(b.product, 16384.0 * 14.0 * 16.0);
    }
}
