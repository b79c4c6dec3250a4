use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ptlab_experiments::grid::{to_csv_string, write_reference_csv};
use ptlab_experiments::plot::{parse_grid_csv, render};
use ptlab_experiments::{run_trials, tradeoff_grid, ExpError, PlotKind, RawConfig, Result, Sweep};

#[derive(Parser)]
#[command(name = "ptlab", version, about = "Distribution testing under memory and communication limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated seeded trials of one tester and report its error rate.
    Trials(ExperimentArgs),
    /// Sweep two parameters and write one CSV row per cell (and instance).
    Grid {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Outer axis, e.g. `mem-bits=2^10,2^11,2^12`.
        #[arg(long)]
        axis1: String,
        /// Inner axis, e.g. `samples=2^19,2^20`.
        #[arg(long)]
        axis2: String,
    },
    /// Render grid CSVs as SVG.
    Plot {
        /// Grid CSV files; rows are pooled.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// `frontier` or `error-vs-resource`.
        #[arg(long, default_value = "frontier")]
        kind: String,
        /// Linear instead of logarithmic axes.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// central-bipartite, streaming-uniformity, dist-bipartite,
    /// dist-aggregate, closeness-memory, closeness-distributed or adapter-check.
    #[arg(long)]
    tester: Option<String>,
    /// Domain size; `2^14` is accepted.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Samples per player.
    #[arg(long)]
    ell: Option<String>,
    /// Memory budget of streaming-uniformity.
    #[arg(long = "mem-bits")]
    mem_bits: Option<String>,
    /// Hash range of closeness-memory.
    #[arg(long)]
    buckets: Option<String>,
    /// Total samples for the bipartite testers.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// uniform, paninski, disjoint-halves, zipf or custom-file. The grid
    /// command accepts a comma-separated list.
    #[arg(long)]
    instance: Option<String>,
    /// Probability file for `--instance custom-file`.
    #[arg(long = "instance-file")]
    instance_file: Option<String>,
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn raw(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::new(),
        };
        let flags = [
            ("tester", &self.tester),
            ("n", &self.n),
            ("eps", &self.eps),
            ("ell", &self.ell),
            ("mem-bits", &self.mem_bits),
            ("buckets", &self.buckets),
            ("samples", &self.samples),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("instance", &self.instance),
            ("instance-file", &self.instance_file),
            ("jobs", &self.jobs),
        ];
        let mut over = RawConfig::new();
        for (k, v) in flags {
            if let Some(v) = v {
                over.set(k, v)?;
            }
        }
        raw = raw.merged(&over);
        Ok(raw)
    }

    fn out(&self, raw: &RawConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| raw.get("out").map(PathBuf::from))
    }
}

fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => ignore_broken_pipe(std::io::stdout().write_all(content.as_bytes()))?,
    }
    Ok(())
}

fn ignore_broken_pipe(r: std::io::Result<()>) -> std::io::Result<()> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Trials(args) => {
            let raw = args.raw()?;
            let report = run_trials(&raw.to_config()?)?;
            ignore_broken_pipe(write!(std::io::stdout(), "{report}"))?;
            if let Some(out) = args.out(&raw) {
                fs::write(out, to_csv_string(std::slice::from_ref(&report)))?;
            }
            Ok(())
        }
        Command::Grid { exp, axis1, axis2 } => {
            let raw = exp.raw()?;
            let (a1, a2) = (Sweep::parse(&axis1)?, Sweep::parse(&axis2)?);
            let instances: Vec<String> = raw
                .get("instance")
                .unwrap_or("")
                .split(',')
                .map(|s| s.trim().to_string())
                .collect();
            let mut reports = Vec::new();
            for inst in &instances {
                let mut one = RawConfig::new();
                one.set("instance", inst)?;
                let base = raw.clone().merged(&one).to_config()?;
                for r in tradeoff_grid(&base, &a1, &a2)? {
                    eprintln!(
                        "{} {}={} {}={}: error {:.4} [{:.4}, {:.4}]",
                        r.instance,
                        a1.key,
                        value_of(&r, &a1.key),
                        a2.key,
                        value_of(&r, &a2.key),
                        r.err_rate,
                        r.err_lo,
                        r.err_hi
                    );
                    reports.push(r);
                }
            }
            let out = exp.out(&raw);
            write_out(out.as_deref(), &to_csv_string(&reports))?;
            if let (Some(out), Some(first)) = (out, reports.first()) {
                let mut resources: Vec<f64> = reports
                    .iter()
                    .filter_map(|r| r.mem_bits.map(|m| m as f64).or(r.buckets.map(|b| b as f64)).or(r.ell.map(|l| l as f64)))
                    .collect();
                resources.sort_by(f64::total_cmp);
                resources.dedup();
                let path = out.with_extension("reference.csv");
                write_reference_csv(first.n, first.eps, &resources, fs::File::create(path)?)?;
            }
            Ok(())
        }
        Command::Plot {
            inputs,
            kind,
            linear,
            out,
        } => {
            let kind: PlotKind = kind.parse()?;
            let mut rows = Vec::new();
            for p in &inputs {
                let text = fs::read_to_string(p)
                    .map_err(|e| ExpError::Usage(format!("cannot read {}: {e}", p.display())))?;
                rows.extend(parse_grid_csv(&text)?);
            }
            write_out(out.as_deref(), &render(&rows, kind, !linear)?)
        }
    }
}

fn value_of(r: &ptlab_experiments::TrialReport, key: &str) -> String {
    match key {
        "mem-bits" => opt(r.mem_bits),
        "buckets" => opt(r.buckets),
        "ell" => opt(r.ell),
        "samples" => opt(r.samples_setting),
        "n" => r.n.to_string(),
        "eps" => r.eps.to_string(),
        "trials" => r.trials.to_string(),
        "seed" => r.seed.to_string(),
        _ => "?".into(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
