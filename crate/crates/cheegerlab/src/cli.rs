//! Command-line front end: kernel loading/generation, bound reports,
//! verification suites, and mixing comparisons.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{full_report, BoundReport};
use crate::chains::{generate, ChainSpec};
use crate::error::{Error, Result};
use crate::evolving::mp_mixing_bound_trajectory;
use crate::kernel::{tv_distance, KernelFile, MarkovKernel};
use crate::spectra::{lambda_max, lambda_star, spectral_gap};
use crate::verify::{run_all, run_suite, SuiteResult, VerifyConfig};

/// Spectral-bound laboratory for finite Markov kernels.
#[derive(Debug, Parser)]
#[command(name = "cheegerlab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Where the kernel comes from: a JSON file or a built-in family.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Kernel JSON file (`{"labels": [...], "P": [[...], ...]}`).
    #[arg(long, conflicts_with = "chain")]
    pub input: Option<PathBuf>,
    /// Built-in family: two_point | cycle | lazy_cycle | complete |
    /// hypercube | rotation | random_reversible | random_general.
    #[arg(long)]
    pub chain: Option<String>,
    /// State count for sized families.
    #[arg(long)]
    pub n: Option<usize>,
    /// Hypercube dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Holding probability blended into the chain.
    #[arg(long)]
    pub laziness: Option<f64>,
    /// Seed for the random families.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SourceArgs {
    pub fn load(&self) -> Result<MarkovKernel> {
        match (&self.input, &self.chain) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)?;
                let file: KernelFile = serde_json::from_str(&text)?;
                MarkovKernel::from_file(file)
            }
            (None, Some(chain)) => generate(&self.spec(chain)?),
            _ => Err(Error::InvalidSpec(
                "exactly one of --input and --chain is required".into(),
            )),
        }
    }

    fn spec(&self, chain: &str) -> Result<ChainSpec> {
        let n = |default: usize| self.n.unwrap_or(default);
        let mut spec = match chain {
            "two_point" => ChainSpec::two_point(),
            "cycle" => ChainSpec::cycle(n(5)),
            "lazy_cycle" => ChainSpec::lazy_cycle(n(5)),
            "complete" => ChainSpec::complete(n(4)),
            // Hypercube walks default to holding probability 1/2.
            "hypercube" => ChainSpec::hypercube(self.d.unwrap_or(3), self.laziness.unwrap_or(0.5)),
            "rotation" => ChainSpec::rotation(n(3)),
            "random_reversible" => ChainSpec::random_reversible(n(5), self.seed),
            "random_general" => ChainSpec::random_general(n(5), self.seed),
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown chain family {other:?}"
                )))
            }
        };
        if chain != "hypercube" {
            if let Some(l) = self.laziness {
                spec = spec.with_laziness(l);
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the exact spectrum and every applicable bound.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Write the rendering here (atomically) instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suites over seeded fixtures.
    Verify {
        /// Run a single suite instead of all of them.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random fixtures per randomized suite.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Largest random-kernel size.
        #[arg(long = "n-max", default_value_t = 8)]
        n_max: usize,
        /// Monte-Carlo samples for the mixing suite.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// Compare exact mixing against the evolving-set Monte-Carlo bound.
    Mix {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in kernel as JSON.
    Generate {
        #[command(flatten)]
        source: SourceArgs,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for an error per the CLI contract: 3 for the enumeration
/// cap, 2 for any other input problem.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::TooManyStates { .. } => 3,
        _ => 2,
    }
}

/// Write output atomically: write to a sibling temp file, then rename,
/// so no partial file is observable on error.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Exact spectral summary attached to renderings.
struct SpectralSummary {
    gap: f64,
    lambda_max: Option<f64>,
    lambda_star: f64,
}

fn spectral_summary(k: &MarkovKernel) -> Result<SpectralSummary> {
    Ok(SpectralSummary {
        gap: spectral_gap(k)?,
        lambda_max: if k.is_reversible() {
            Some(lambda_max(k)?)
        } else {
            None
        },
        lambda_star: lambda_star(k)?,
    })
}

fn witness_bits(e: &crate::bounds::BoundEntry) -> String {
    e.witness.map(|w| w.bits().to_string()).unwrap_or_default()
}

/// CSV columns: `name,value,target,exact,valid,witness_bitmask`.
fn analyze_csv(summary: &SpectralSummary, report: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# n={} reversible={}", report.n, report.reversible);
    let _ = writeln!(s, "# lambda={}", summary.gap);
    if let Some(lm) = summary.lambda_max {
        let _ = writeln!(s, "# lambda_max={lm}");
    }
    let _ = writeln!(s, "# lambda_star={}", summary.lambda_star);
    s.push_str("name,value,target,exact,valid,witness_bitmask\n");
    for e in &report.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            e.name,
            e.value,
            e.target.label(),
            e.exact,
            e.valid,
            witness_bits(e)
        );
    }
    s
}

fn analyze_table(k: &MarkovKernel, summary: &SpectralSummary, report: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "kernel: n={} reversible={} P0={} P0^={}",
        report.n, report.reversible, report.p0, report.p0_hat
    );
    let _ = writeln!(s, "exact:  lambda={:.12}", summary.gap);
    match summary.lambda_max {
        Some(lm) => {
            let _ = writeln!(s, "        lambda_max={lm:.12}");
        }
        None => {
            let _ = writeln!(s, "        lambda_max=n/a (not reversible)");
        }
    }
    let _ = writeln!(s, "        lambda_star={:.12}", summary.lambda_star);
    let _ = writeln!(
        s,
        "{:<24} {:>14} {:>14} {:>14} {:>6}  witness",
        "bound", "value", "exact", "slack", "valid"
    );
    for e in &report.entries {
        let slack = if e.upper {
            e.value - e.exact
        } else {
            e.exact - e.value
        };
        let witness = e
            .witness
            .map(|w| w.describe(k))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<24} {:>14.9} {:>14.9} {:>14.2e} {:>6}  {}",
            format!("{}{}", e.name, if e.upper { " (upper)" } else { "" }),
            e.value,
            e.exact,
            slack,
            e.valid,
            witness
        );
        for (wname, wvalue) in &e.weak_forms {
            let _ = writeln!(s, "  weaker: {wname} = {wvalue:.9}");
        }
    }
    for (name, err) in &report.errors {
        let _ = writeln!(s, "error: {name}: {err}");
    }
    s
}

fn analyze_json(summary: &SpectralSummary, report: &BoundReport) -> String {
    let entries: Vec<serde_json::Value> = report
        .entries
        .iter()
        .map(|e| {
            serde_json::json!({
                "name": e.name,
                "value": e.value,
                "target": e.target.label(),
                "exact": e.exact,
                "valid": e.valid,
                "upper": e.upper,
                "route": e.route.label(),
                "witness_bitmask": e.witness.map(|w| w.bits()),
                "weak_forms": e.weak_forms.iter()
                    .map(|(n, v)| serde_json::json!({"name": n, "value": v}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "n": report.n,
        "reversible": report.reversible,
        "p0": report.p0,
        "p0_hat": report.p0_hat,
        "lambda": summary.gap,
        "lambda_max": summary.lambda_max,
        "lambda_star": summary.lambda_star,
        "entries": entries,
        "errors": report.errors.iter()
            .map(|(n, e)| serde_json::json!({"name": n, "error": e}))
            .collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

fn cmd_analyze(source: &SourceArgs, format: Format, out: &Option<PathBuf>) -> Result<i32> {
    let k = source.load()?;
    // Every bound sweeps subsets exhaustively; refuse up front rather than
    // emitting a report whose every row errored.
    if k.n() > crate::setops::ENUMERATION_CAP {
        return Err(Error::TooManyStates {
            n: k.n(),
            cap: crate::setops::ENUMERATION_CAP,
        });
    }
    let report = full_report(&k)?;
    let summary = spectral_summary(&k)?;
    let rendering = match format {
        Format::Table => analyze_table(&k, &summary, &report),
        Format::Csv => analyze_csv(&summary, &report),
        Format::Json => analyze_json(&summary, &report),
    };
    emit(out, &rendering)?;
    Ok(if report.all_valid() { 0 } else { 4 })
}

fn cmd_verify(
    suite: &Option<String>,
    seed: u64,
    count: usize,
    n_max: usize,
    samples: usize,
) -> Result<i32> {
    let cfg = VerifyConfig {
        seed,
        count,
        n_max,
        samples,
    };
    let results: Vec<SuiteResult> = match suite {
        Some(name) => vec![run_suite(name, &cfg)?],
        None => run_all(&cfg)?,
    };
    let mut failed = 0usize;
    for r in &results {
        if r.passed() {
            println!("{:<14} PASS ({} checks)", r.name, r.checks);
        } else {
            failed += 1;
            println!(
                "{:<14} FAIL ({} of {} checks failed)",
                r.name,
                r.failures.len(),
                r.checks
            );
            for f in r.failures.iter().take(5) {
                println!("    {f}");
            }
            if r.failures.len() > 5 {
                println!("    ... and {} more", r.failures.len() - 5);
            }
        }
    }
    let total: usize = results.iter().map(|r| r.checks).sum();
    println!(
        "{} suites, {} checks, {} suites failed",
        results.len(),
        total,
        failed
    );
    Ok(if failed == 0 { 0 } else { 1 })
}

/// CSV columns: `steps,exact_tv,mc_bound,mc_stderr,envelope`.
fn cmd_mix(
    source: &SourceArgs,
    steps: usize,
    samples: usize,
    format: Format,
    out: &Option<PathBuf>,
) -> Result<i32> {
    if samples == 0 {
        return Err(Error::InvalidSpec("--samples must be positive".into()));
    }
    let k = source.load()?;
    let envelope_base = if k.is_reversible() {
        Some((lambda_max(&k)?, k.pi().min()))
    } else {
        None
    };
    // Worst start state per step count, for both the exact distance and
    // the Monte-Carlo bound.
    let trajectories: Vec<_> = (0..k.n())
        .map(|x| mp_mixing_bound_trajectory(&k, x, steps, samples, source.seed))
        .collect();
    let mut rows = Vec::new();
    for n in 0..=steps {
        let tv = (0..k.n())
            .map(|x| tv_distance(&k, x, n))
            .fold(0.0, f64::max);
        let est = trajectories
            .iter()
            .map(|t| t[n])
            .max_by(|a, b| a.mean.partial_cmp(&b.mean).expect("finite means"))
            .expect("n >= 2 states");
        let envelope = envelope_base.map(|(lm, min_pi)| 0.5 * lm.powi(n as i32) / min_pi);
        rows.push((n, tv, est.mean, est.stderr, envelope));
    }
    let mut s = String::new();
    match format {
        Format::Csv => {
            s.push_str("steps,exact_tv,mc_bound,mc_stderr,envelope\n");
            for (n, tv, mean, stderr, envelope) in rows {
                let env = envelope.map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(s, "{n},{tv},{mean},{stderr},{env}");
            }
        }
        Format::Table => {
            let _ = writeln!(
                s,
                "{:>5} {:>14} {:>14} {:>12} {:>14}",
                "steps", "exact_tv", "mc_bound", "mc_stderr", "envelope"
            );
            for (n, tv, mean, stderr, envelope) in rows {
                let env = envelope
                    .map(|e| format!("{e:>14.9}"))
                    .unwrap_or_else(|| format!("{:>14}", "n/a"));
                let _ = writeln!(s, "{n:>5} {tv:>14.9} {mean:>14.9} {stderr:>12.3e} {env}");
            }
        }
        Format::Json => {
            let doc: Vec<_> = rows
                .iter()
                .map(|(n, tv, mean, stderr, envelope)| {
                    serde_json::json!({
                        "steps": n,
                        "exact_tv": tv,
                        "mc_bound": mean,
                        "mc_stderr": stderr,
                        "envelope": envelope,
                    })
                })
                .collect();
            s = serde_json::to_string_pretty(&doc).expect("rows serialize");
            s.push('\n');
        }
    }
    emit(out, &s)?;
    Ok(0)
}

fn cmd_generate(source: &SourceArgs, out: &Option<PathBuf>) -> Result<i32> {
    if source.input.is_some() {
        return Err(Error::InvalidSpec(
            "generate takes a --chain spec, not --input".into(),
        ));
    }
    let k = source.load()?;
    let mut text = serde_json::to_string_pretty(&k.to_file())?;
    text.push('\n');
    emit(out, &text)?;
    Ok(0)
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Analyze {
            source,
            format,
            out,
        } => cmd_analyze(source, *format, out),
        Command::Verify {
            suite,
            seed,
            count,
            n_max,
            samples,
        } => cmd_verify(suite, *seed, *count, *n_max, *samples),
        Command::Mix {
            source,
            steps,
            samples,
            format,
            out,
        } => cmd_mix(source, *steps, *samples, *format, out),
        Command::Generate { source, out } => cmd_generate(source, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}
