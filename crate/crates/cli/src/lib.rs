//! Subcommand implementations for the `mwrc` binary.
//!
//! Each `cmd_*` function parses nothing and computes nothing of its own: it
//! turns validated arguments into library calls and renders the result.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pairwise_mwrc::model::build_client_graph;
use pairwise_mwrc::optimal::{optimum, Objective};
use pairwise_mwrc::prufer::{brute_force_best, DEFAULT_ENUMERATION_CAP};
use pairwise_mwrc::rate::{evaluate, evaluate_with_phases, RateReportDoc};
use pairwise_mwrc::sim::{run_gap_experiment, to_csv, ChannelConfig};
use pairwise_mwrc::verify::{run_all, VerifyReport};
use pairwise_mwrc::{canonicalize, BoundKind, Error, OrderingDoc, SnrProfile};

#[derive(Debug, Parser)]
#[command(
    name = "mwrc",
    version,
    about = "Rates and optimal orderings of pairwise FDF multiway relay channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the rates of an ordering read from a JSON file.
    Rate(RateArgs),
    /// Print the optimal ordering and its closed-form rate.
    Optimal(OptimalArgs),
    /// Search every tree ordering for the best rate.
    Brute(BruteArgs),
    /// Monte Carlo comparison of optimal and random orderings, as CSV.
    Simulate(SimulateArgs),
    /// Re-check the optimality properties on random instances.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SnrArgs {
    /// Per-user SNRs, comma separated, linear scale unless --db.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub snr: Vec<f64>,
    /// Read --snr values in dB.
    #[arg(long)]
    pub db: bool,
}

impl SnrArgs {
    pub fn profile(&self) -> Result<SnrProfile, CliError> {
        let linear: Vec<f64> = if self.db {
            self.snr.iter().map(|d| 10f64.powf(d / 10.0)).collect()
        } else {
            self.snr.clone()
        };
        Ok(canonicalize(&linear)?)
    }
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Ordering document with 1-based user indices in --snr order.
    #[arg(long)]
    pub ordering: PathBuf,
    #[command(flatten)]
    pub snr: SnrArgs,
    #[arg(long, default_value = "exact")]
    pub bound: BoundKind,
    /// Reject orderings that are not trees.
    #[arg(long)]
    pub require_tree: bool,
}

#[derive(Debug, Args)]
pub struct OptimalArgs {
    #[command(flatten)]
    pub snr: SnrArgs,
    #[arg(long)]
    pub objective: Objective,
}

#[derive(Debug, Args)]
pub struct BruteArgs {
    #[command(flatten)]
    pub snr: SnrArgs,
    #[arg(long)]
    pub objective: Objective,
    #[arg(long, default_value = "weak")]
    pub bound: BoundKind,
    /// Largest user count to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of users.
    #[arg(long)]
    pub n: usize,
    /// Values of 1/sigma^2 in dB as start:step:end, or a comma list.
    #[arg(long, default_value = "1:2:15")]
    pub sweep: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Variance of each real and imaginary channel component.
    #[arg(long, default_value_t = 0.5)]
    pub variance: f64,
    /// Transmit power of every user.
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// User counts as lo:hi, or a single count.
    #[arg(long, default_value = "3:5")]
    pub n: String,
    #[arg(long, default_value_t = 500)]
    pub profiles: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input, exit 1.
    Usage(String),
    /// Invalid or infeasible input, exit 2.
    Domain(String),
    /// Resource guard tripped, exit 3.
    Resource(String),
    /// Verification found violations, exit 2.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) | CliError::Failed(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Resource(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::EnumerationCap { .. } => CliError::Resource(format!("enumeration cap: {e}")),
            other => CliError::Domain(other.to_string()),
        }
    }
}

/// Parses `start:step:end` (inclusive) or `a,b,c`.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid sweep `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if !step.is_finite() || step <= 0.0 || end < start {
                return Err(bad());
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| start + k as f64 * step).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

/// Parses `lo:hi` (inclusive) or a single count.
pub fn parse_n_range(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid user-count range `{spec}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match spec.split_once(':') {
        Some((a, b)) => (num(a)?, num(b)?),
        None => {
            let n = num(spec)?;
            (n, n)
        }
    };
    if lo < 2 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(pool.install(f))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Output of a command: text for stdout plus warnings for stderr.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

pub fn cmd_rate(args: &RateArgs) -> Result<Output, CliError> {
    let text = std::fs::read_to_string(&args.ordering)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.ordering.display())))?;
    let doc = OrderingDoc::from_json(&text)?;
    let profile = args.snr.profile()?;
    if doc.n != profile.len() {
        return Err(Error::SizeMismatch {
            graph: doc.n,
            profile: profile.len(),
        }
        .into());
    }
    let ordering = doc.ordering()?.to_canonical(&profile)?;
    let graph = build_client_graph(&ordering, doc.n)?;
    let mut out = Output::default();
    for &(a, b) in graph.collapsed_duplicates() {
        out.warnings.push(format!(
            "pair {{{}, {}}} repeated, counted once",
            profile.to_original(a),
            profile.to_original(b)
        ));
    }
    if !graph.is_feasible() {
        return Err(Error::Infeasible.into());
    }
    let report = if graph.is_tree() {
        evaluate(&graph, &profile, args.bound)?
    } else if args.require_tree {
        return Err(Error::NotATree {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
        }
        .into());
    } else {
        out.warnings.push(format!(
            "ordering is not a tree, rates use M = {} uplink phases",
            ordering.len()
        ));
        evaluate_with_phases(&graph, &profile, args.bound, ordering.len())?
    };
    let doc: RateReportDoc = report.labeled(&profile);
    out.stdout = to_json(&doc);
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct OptimalDoc {
    pub objective: Objective,
    pub ordering: OrderingDoc,
    pub closed_form: f64,
    pub evaluated_weak: f64,
    pub low_snr: bool,
}

pub fn cmd_optimal(args: &OptimalArgs) -> Result<Output, CliError> {
    let profile = args.snr.profile()?;
    let opt = optimum(&profile, args.objective)?;
    let mut out = Output::default();
    if opt.low_snr {
        out.warnings
            .push("low-SNR profile: weak and exact bounds differ, closed form and evaluated rate may disagree".into());
    }
    out.stdout = to_json(&OptimalDoc {
        objective: opt.objective,
        ordering: OrderingDoc::new(profile.len(), &opt.ordering.to_original(&profile)),
        closed_form: opt.closed_form,
        evaluated_weak: opt.evaluated,
        low_snr: opt.low_snr,
    });
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CoOptimalEntry {
    /// Over canonical (SNR-sorted) indices.
    pub prufer_code: Vec<usize>,
    /// Over input positions.
    pub ordering: OrderingDoc,
}

#[derive(Debug, Serialize)]
pub struct BruteDoc {
    pub objective: Objective,
    pub bound_kind: BoundKind,
    pub best_value: f64,
    pub trees_searched: u64,
    pub constructive_co_optimal: bool,
    pub co_optimal: Vec<CoOptimalEntry>,
}

pub fn cmd_brute(args: &BruteArgs) -> Result<Output, CliError> {
    let profile = args.snr.profile()?;
    let n = profile.len();
    let result = brute_force_best(&profile, args.objective, args.bound, args.cap)?;
    let constructive = optimum(&profile, args.objective)?.ordering;
    let constructive = build_client_graph(&constructive, n)?;
    let co_optimal = result
        .co_optimal
        .iter()
        .map(|code| CoOptimalEntry {
            prufer_code: code.labels().to_vec(),
            ordering: OrderingDoc::new(n, &code.decode().to_ordering().to_original(&profile)),
        })
        .collect();
    let out = Output {
        stdout: to_json(&BruteDoc {
            objective: args.objective,
            bound_kind: args.bound,
            best_value: result.best_value,
            trees_searched: result.trees_searched,
            constructive_co_optimal: result.contains(&constructive),
            co_optimal,
        }),
        warnings: Vec::new(),
    };
    Ok(out)
}

pub fn simulate_config(args: &SimulateArgs) -> Result<ChannelConfig, CliError> {
    let config = ChannelConfig {
        n_users: args.n,
        transmit_power: vec![args.power; args.n],
        fading_variance: args.variance,
        snr_sweep_db: parse_sweep(&args.sweep)?,
        trials: args.trials,
        seed: args.seed,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Output, CliError> {
    let config = simulate_config(args)?;
    let stats = with_threads(args.threads, || run_gap_experiment(&config))??;
    let csv = to_csv(&stats);
    let mut out = Output::default();
    let skipped: u64 = stats.iter().map(|s| s.dominance_violations).sum();
    if skipped > 0 {
        out.warnings.push(format!(
            "{skipped} in-regime trials where a random tree beat the optimum"
        ));
    }
    match &args.output {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?
        }
        None => out.stdout = csv,
    }
    Ok(out)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(Output, VerifyReport), CliError> {
    let ns = parse_n_range(&args.n)?;
    if let Some(&n) = ns.iter().find(|&&n| n > DEFAULT_ENUMERATION_CAP) {
        return Err(Error::EnumerationCap {
            n,
            cap: DEFAULT_ENUMERATION_CAP,
        }
        .into());
    }
    let report = with_threads(args.threads, || run_all(ns, args.profiles, args.seed))??;
    let mut out = Output::default();
    for c in &report.checks {
        out.stdout.push_str(&c.to_string());
        out.stdout.push('\n');
    }
    let failed = report.checks.iter().filter(|c| !c.passed()).count();
    out.stdout.push_str(&format!(
        "{} checks, {} failed, seed {}\n",
        report.checks.len(),
        failed,
        args.seed
    ));
    Ok((out, report))
}

/// Runs one parsed command. On failure the returned error carries the exit
/// code.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Rate(a) => cmd_rate(a),
        Command::Optimal(a) => cmd_optimal(a),
        Command::Brute(a) => cmd_brute(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => {
            let (out, report) = cmd_verify(a)?;
            if report.passed() {
                Ok(out)
            } else {
                Err(CliError::Failed(out.stdout))
            }
        }
    }
}
