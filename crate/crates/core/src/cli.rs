//! The `canyon` command line.
//!
//! Every subcommand writes either CSV rows with a fixed header or one JSON
//! object (`--format json`), to standard output or `--output`. Column sets
//! and keys are listed in `SCHEMA.md`. Exit codes: 0 success, 1 internal
//! error, 2 bad input, 3 a statistical guard tripped.

use std::collections::hash_map::RandomState;
use std::fs::File;
use std::hash::BuildHasher;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::coupling::{self, Property};
use crate::criticality::{self, CriticalParams, TailOptions};
use crate::engine::{run, RunMode, RunSpec, StepRecord};
use crate::error::{Error, Result};
use crate::excursion::{self, DeltaSymbol, DEFAULT_HORIZON};
use crate::oracle;
use crate::position::{ExpPos, UnitPos, P_C};
use crate::stats::Z_95;

/// Version of the CSV column sets and JSON keys.
pub const SCHEMA_VERSION: u32 = 1;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `--seed`: an unsigned integer, or `random` for a fresh one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("random") {
            return Ok(SeedArg::Random);
        }
        s.parse()
            .map(SeedArg::Fixed)
            .map_err(|_| format!("expected an unsigned integer or `random`, got `{s}`"))
    }
}

impl SeedArg {
    fn resolve(self) -> u64 {
        match self {
            SeedArg::Fixed(s) => s,
            SeedArg::Random => RandomState::new().hash_one(std::time::SystemTime::now()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "canyon", version, about = "Simulate and analyse the leftmost-removal point process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "CANYON_THREADS")]
    pub threads: Option<usize>,

    /// Master seed (unsigned integer or `random`).
    #[arg(long, global = true, default_value = "1")]
    pub seed: SeedArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Step-by-step trace of one chain.
    /// CSV: k,outcome,removed,minimum,size[,count_le_<threshold>...]
    Simulate(SimulateArgs),
    /// Mean return time to the empty set against 1/(1+ln(1-q)).
    /// CSV: q,t,n,horizon,mean,stderr,ci_low,ci_high,closed_form,rel_error,z_score,censored,lower_bound
    ReturnTimes(ReturnTimesArgs),
    /// Increment-symbol frequencies of threshold counts.
    /// CSV: t,q,symbol,estimate,stderr,closed_form,deviation
    DeltaDensity(DeltaDensityArgs),
    /// Regenerative sampling of the stationary restricted chain.
    /// CSV: q,t,cycles,states,empty_states,empty_fraction,empty_fraction_target,mean_cycle_length,closed_form_mean_return,mean_size
    Stationary(StationaryArgs),
    /// Stationary law of the restricted minimum against the uniform law.
    /// CSV: q,t_plus,s,empirical,target,deviation,max_deviation
    MinLaw(MinLawArgs),
    /// Exact return-time polynomials.
    /// CSV: k,power,numerator,denominator (with --q: k,q,probability,tail_mass)
    Oracle(OracleArgs),
    /// Bisection for the critical point.
    /// CSV: q,replicas,survivors,surviving_fraction,ci_low,ci_high,class,tie_break,estimate
    Critical(CriticalArgs),
    /// Log-log fit of the return-time tail (a conjecture check).
    /// CSV: q,k,survivors,survival,exponent,stderr,fit_quality,verdict
    Tail(TailArgs),
    /// Linear growth of the count left of t > 1 against its lower bound.
    /// CSV: t,q,steps,count,rate,bound,margin
    Growth(GrowthArgs),
    /// Randomized checks of the pathwise comparison properties.
    /// CSV: property,trials,steps,checks,violations
    CoupleTest(CoupleTestArgs),
    /// Finite-horizon survival probability of excursions.
    /// CSV: q,horizon,replicas,survivors,surviving_fraction,ci_low,ci_high
    Survival(SurvivalArgs),
    /// Largest minimum of the full chain over a late window.
    /// CSV: seed,steps,window_start,max_minimum,p_c
    RunningMax(RunningMaxArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Full,
    Restricted,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    pub mode: Mode,
    /// Cutoff of the restricted chain.
    #[arg(long, required_if_eq("mode", "restricted"))]
    pub q: Option<f64>,
    /// Emit every stride-th step.
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    /// Thresholds (uniform coordinates) whose counts are reported; full mode.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ReturnTimesArgs {
    #[arg(long)]
    pub q: f64,
    /// Number of excursions.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: u64,
}

#[derive(Debug, Args)]
pub struct DeltaDensityArgs {
    /// Levels in exponential coordinates, each below 1.
    #[arg(long = "t", value_delimiter = ',', default_value = "0.2,0.5,0.8")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub burnin: u64,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub cycles: u64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: u64,
}

#[derive(Debug, Args)]
pub struct MinLawArgs {
    #[arg(long)]
    pub q: f64,
    /// Minimum number of emitted states.
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: u64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 8)]
    pub kmax: usize,
    /// Evaluate the polynomials at this q.
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[arg(long, default_value_t = 0.5)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.75)]
    pub hi: f64,
    /// Bisection probes after the endpoint checks.
    #[arg(long, default_value_t = 16)]
    pub probes: usize,
    #[arg(long, default_value_t = 0.005)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    /// Defaults to p_c.
    #[arg(long)]
    pub q: Option<f64>,
    /// Grid 2^k_min_exp ..= 2^k_max_exp.
    #[arg(long, default_value_t = 6)]
    pub k_min_exp: u32,
    #[arg(long, default_value_t = 18)]
    pub k_max_exp: u32,
    #[arg(long, default_value_t = 100_000)]
    pub replicas: u64,
    /// Fit the smallest decade of k too.
    #[arg(long)]
    pub keep_first_decade: bool,
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[arg(long = "t", default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    All,
    Inclusion,
    OrderedDomination,
    Restriction,
}

#[derive(Debug, Args)]
pub struct CoupleTestArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1_000)]
    pub steps: u64,
    #[arg(long, value_enum, default_value_t = PropertyArg::All)]
    pub property: PropertyArg,
}

#[derive(Debug, Args)]
pub struct SurvivalArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
}

#[derive(Debug, Args)]
pub struct RunningMaxArgs {
    #[arg(long, default_value_t = 10_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub window_start: u64,
}

/// Formats with 9 significant digits, trailing zeros dropped; scientific
/// notation outside `[1e-5, 1e9)`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci.split_once('e').expect("scientific format").1.parse().expect("exponent");
    if !(-5..9).contains(&exp) {
        return sci;
    }
    let decimals = (8 - exp).max(0) as usize;
    let plain = format!("{x:.decimals$}");
    if plain.contains('.') {
        plain.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        plain
    }
}

/// What a subcommand produced.
struct Output {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    json: Value,
    /// Set when a statistical guard failed but output is still meaningful.
    guard_failure: Option<String>,
}

impl Output {
    fn new(header: &[&str], json: Value) -> Self {
        Output {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            json,
            guard_failure: None,
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn n(x: f64) -> String {
    fmt_num(x)
}

fn i<T: ToString>(x: T) -> String {
    x.to_string()
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Diagnostics go to standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(None) => EXIT_OK,
        Ok(Some(msg)) => {
            eprintln!("canyon: statistical guard failed: {msg}");
            EXIT_GUARD
        }
        Err(e) => {
            eprintln!("canyon: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_precondition() {
        EXIT_USAGE
    } else if e.is_statistical_guard() {
        EXIT_GUARD
    } else {
        EXIT_INTERNAL
    }
}

/// Runs a parsed command line. `Ok(Some(msg))` means the output was written
/// but a statistical guard failed.
pub fn execute(cli: &Cli) -> Result<Option<String>> {
    let seed = cli.seed.resolve();
    let out = match cli.threads {
        Some(0) => return Err(Error::Precondition("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start {t} threads: {e}")))?
            .install(|| dispatch(&cli.command, seed))?,
        None => dispatch(&cli.command, seed)?,
    };
    let write = |w: &mut dyn Write| -> io::Result<()> {
        match cli.format {
            Format::Csv => {
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record(&out.header)?;
                for r in &out.rows {
                    csv.write_record(r)?;
                }
                csv.flush()
            }
            Format::Json => {
                let doc = json!({
                    "schema": format!("canyon.{}", command_name(&cli.command)),
                    "version": SCHEMA_VERSION,
                    "library_version": env!("CARGO_PKG_VERSION"),
                    "seed": seed,
                    "inputs": inputs(&cli.command),
                    "result": out.json,
                });
                serde_json::to_writer_pretty(&mut *w, &doc)?;
                writeln!(w)
            }
        }
    };
    let io_result = match &cli.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w).and_then(|_| w.flush())
        }
    };
    io_result.map_err(|e| Error::Precondition(format!("cannot write output: {e}")))?;
    Ok(out.guard_failure)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::ReturnTimes(_) => "return-times",
        Command::DeltaDensity(_) => "delta-density",
        Command::Stationary(_) => "stationary",
        Command::MinLaw(_) => "min-law",
        Command::Oracle(_) => "oracle",
        Command::Critical(_) => "critical",
        Command::Tail(_) => "tail",
        Command::Growth(_) => "growth",
        Command::CoupleTest(_) => "couple-test",
        Command::Survival(_) => "survival",
        Command::RunningMax(_) => "running-max",
    }
}

fn inputs(c: &Command) -> Value {
    match c {
        Command::Simulate(a) => json!({
            "steps": a.steps, "mode": format!("{:?}", a.mode).to_lowercase(), "q": a.q,
            "stride": a.stride, "thresholds": a.thresholds,
        }),
        Command::ReturnTimes(a) => json!({"q": a.q, "n": a.n, "horizon": a.horizon}),
        Command::DeltaDensity(a) => json!({"t": a.t, "steps": a.steps, "burnin": a.burnin}),
        Command::Stationary(a) => json!({"q": a.q, "cycles": a.cycles, "horizon": a.horizon}),
        Command::MinLaw(a) => json!({"q": a.q, "samples": a.samples, "horizon": a.horizon}),
        Command::Oracle(a) => json!({"kmax": a.kmax, "q": a.q}),
        Command::Critical(a) => json!({
            "lo": a.lo, "hi": a.hi, "probes": a.probes, "tolerance": a.tolerance,
            "horizon": a.horizon, "replicas": a.replicas,
        }),
        Command::Tail(a) => json!({
            "q": a.q.unwrap_or(P_C), "k_min_exp": a.k_min_exp, "k_max_exp": a.k_max_exp,
            "replicas": a.replicas, "keep_first_decade": a.keep_first_decade,
            "bootstrap": a.bootstrap,
        }),
        Command::Growth(a) => json!({"t": a.t, "steps": a.steps}),
        Command::CoupleTest(a) => json!({
            "trials": a.trials, "steps": a.steps,
            "property": format!("{:?}", a.property).to_lowercase(),
        }),
        Command::Survival(a) => json!({"q": a.q, "horizon": a.horizon, "replicas": a.replicas}),
        Command::RunningMax(a) => json!({"steps": a.steps, "window_start": a.window_start}),
    }
}

fn dispatch(c: &Command, seed: u64) -> Result<Output> {
    match c {
        Command::Simulate(a) => simulate(a, seed),
        Command::ReturnTimes(a) => return_times(a, seed),
        Command::DeltaDensity(a) => delta_density(a, seed),
        Command::Stationary(a) => stationary(a, seed),
        Command::MinLaw(a) => min_law(a, seed),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Critical(a) => critical(a, seed),
        Command::Tail(a) => tail(a, seed),
        Command::Growth(a) => growth(a, seed),
        Command::CoupleTest(a) => couple_test(a, seed),
        Command::Survival(a) => survival(a, seed),
        Command::RunningMax(a) => running_max(a, seed),
    }
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<Output> {
    let mode = match a.mode {
        Mode::Full => RunMode::Full {
            thresholds: a.thresholds.iter().map(|&t| UnitPos::new(t)).collect::<Result<_>>()?,
        },
        Mode::Restricted => {
            if !a.thresholds.is_empty() {
                return Err(Error::Precondition("--thresholds needs --mode full".into()));
            }
            let q = a.q.ok_or_else(|| Error::Precondition("--mode restricted needs --q".into()))?;
            RunMode::Restricted { cutoff: UnitPos::new(q)? }
        }
    };
    if a.q.is_some() && a.mode == Mode::Full {
        return Err(Error::Precondition("--q applies to --mode restricted only".into()));
    }
    let mut header = vec!["k", "outcome", "removed", "minimum", "size"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend(a.thresholds.iter().map(|t| format!("count_le_{}", fmt_num(*t))));
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let spec = RunSpec {
        seed,
        replica: 0,
        steps: a.steps,
        mode,
        stride: a.stride,
    };
    let summary = {
        let mut obs = |r: &StepRecord<'_>| {
            let mut row = vec![
                i(r.k),
                r.outcome.label().to_string(),
                r.outcome.removed().map_or(String::new(), |p| n(p.value())),
                n(r.minimum),
                i(r.size),
            ];
            row.extend(r.counts.iter().map(|c| i(*c)));
            rows.push(row);
            records.push(to_json(r));
        };
        run(&spec, &mut [&mut obs])?
    };
    let mut out = Output::new(&[], json!({"records": records, "summary": to_json(&summary)}));
    out.header = header;
    out.rows = rows;
    Ok(out)
}

fn return_times(a: &ReturnTimesArgs, seed: u64) -> Result<Output> {
    let r = excursion::estimate_mean_return(a.q, a.n, seed, a.horizon)?;
    for w in &r.warnings {
        eprintln!("canyon: warning: {w}");
    }
    let (lo, hi) = r.estimate.interval(Z_95);
    let cf = r.closed_form.finite();
    let mut json = to_json(&r);
    if let Some(c) = cf {
        json["rel_error"] = json!((r.estimate.mean - c) / c);
        json["z_score"] = json!(r.estimate.z_score(c));
    }
    let mut out = Output::new(
        &[
            "q", "t", "n", "horizon", "mean", "stderr", "ci_low", "ci_high", "closed_form",
            "rel_error", "z_score", "censored", "lower_bound",
        ],
        json,
    );
    out.row(vec![
        n(r.q),
        n(r.t),
        i(r.n),
        i(r.horizon),
        n(r.estimate.mean),
        n(r.estimate.stderr),
        n(lo),
        n(hi),
        cf.map_or("inf".into(), n),
        cf.map_or(String::new(), |c| n((r.estimate.mean - c) / c)),
        cf.map_or(String::new(), |c| n(r.estimate.z_score(c))),
        i(r.censored),
        i(r.lower_bound),
    ]);
    Ok(out)
}

fn delta_density(a: &DeltaDensityArgs, seed: u64) -> Result<Output> {
    let est = excursion::estimate_delta_densities(&a.t, a.steps, a.burnin, seed)?;
    let json = json!(est
        .iter()
        .map(|e| {
            let mut v = to_json(e);
            v["max_abs_deviation"] = json!(e.max_abs_deviation());
            v["plus_minus_gap"] = json!((e.densities.plus1 - e.densities.minus1).abs());
            v
        })
        .collect::<Vec<_>>());
    let mut out = Output::new(
        &["t", "q", "symbol", "estimate", "stderr", "closed_form", "deviation"],
        json,
    );
    for e in &est {
        for s in DeltaSymbol::ALL {
            let label = to_json(&s).as_str().expect("symbol label").to_string();
            out.row(vec![
                n(e.t),
                n(e.q),
                label,
                n(e.densities.get(s)),
                n(e.stderr.get(s)),
                n(e.closed_form.get(s)),
                n(e.densities.get(s) - e.closed_form.get(s)),
            ]);
        }
    }
    Ok(out)
}

fn stationary(a: &StationaryArgs, seed: u64) -> Result<Output> {
    let (size_sum, s) = excursion::fold_stationary_states(
        a.q,
        a.cycles,
        seed,
        a.horizon,
        || 0u64,
        |acc, cfg| *acc += cfg.len() as u64,
        |x, y| x + y,
    )?;
    let mean_size = size_sum as f64 / s.counts.states as f64;
    let mut json = to_json(&s);
    json["mean_size"] = json!(mean_size);
    let mut out = Output::new(
        &[
            "q", "t", "cycles", "states", "empty_states", "empty_fraction",
            "empty_fraction_target", "mean_cycle_length", "closed_form_mean_return", "mean_size",
        ],
        json,
    );
    out.row(vec![
        n(s.q),
        n(s.t),
        i(s.counts.cycles),
        i(s.counts.states),
        i(s.counts.empty_states),
        n(s.empty_fraction),
        n(s.empty_fraction_target),
        n(s.mean_cycle_length),
        s.closed_form_mean_return.finite().map_or("inf".into(), n),
        n(mean_size),
    ]);
    Ok(out)
}

fn min_law(a: &MinLawArgs, seed: u64) -> Result<Output> {
    let r = excursion::stationary_min_uniformity(a.q, a.samples, seed, a.horizon)?;
    let mut out = Output::new(
        &["q", "t_plus", "s", "empirical", "target", "deviation", "max_deviation"],
        to_json(&r),
    );
    for p in &r.grid {
        out.row(vec![
            n(r.q),
            n(r.t_plus),
            n(p.s),
            n(p.empirical),
            n(p.target),
            n(p.empirical - p.target),
            n(r.max_deviation),
        ]);
    }
    Ok(out)
}

fn oracle_cmd(a: &OracleArgs) -> Result<Output> {
    let pmf = oracle::exact_return_pmf(a.kmax)?;
    let mut json = json!({ "pmf": oracle::pmf_to_json(&pmf) });
    match a.q {
        None => {
            let mut out = Output::new(&["k", "power", "numerator", "denominator"], json);
            for (k, p) in pmf.iter().enumerate() {
                for (pow, c) in p.coeffs().iter().enumerate() {
                    out.row(vec![i(k + 1), i(pow), c.numer().to_string(), c.denom().to_string()]);
                }
            }
            Ok(out)
        }
        Some(q) => {
            let mut tail = oracle::ProbPoly::one();
            let mut values = Vec::new();
            for p in &pmf {
                tail = &tail - p;
                values.push((oracle::eval_pmf(p, q)?, oracle::eval_pmf(&tail, q)?));
            }
            json["evaluated"] = json!(values
                .iter()
                .enumerate()
                .map(|(k, (p, t))| json!({"k": k + 1, "probability": p, "tail_mass": t}))
                .collect::<Vec<_>>());
            if q < P_C {
                json["truncated_mean"] = to_json(&oracle::truncated_mean_check(a.kmax, q)?);
            }
            let mut out = Output::new(&["k", "q", "probability", "tail_mass"], json);
            for (k, (p, t)) in values.iter().enumerate() {
                out.row(vec![i(k + 1), n(q), n(*p), n(*t)]);
            }
            Ok(out)
        }
    }
}

fn critical(a: &CriticalArgs, seed: u64) -> Result<Output> {
    let est = criticality::estimate_critical_point(&CriticalParams {
        lo: a.lo,
        hi: a.hi,
        max_probes: a.probes,
        tolerance: a.tolerance,
        horizon: a.horizon,
        replicas: a.replicas,
        seed,
    })?;
    let mut json = to_json(&est);
    json["p_c"] = json!(P_C);
    let mut out = Output::new(
        &[
            "q", "replicas", "survivors", "surviving_fraction", "ci_low", "ci_high", "class",
            "tie_break", "estimate",
        ],
        json,
    );
    for p in &est.probes {
        let s = &p.survival;
        out.row(vec![
            n(s.q),
            i(s.replicas),
            i(s.survivors),
            n(s.surviving_fraction),
            n(s.ci_low),
            n(s.ci_high),
            p.class.label().into(),
            i(p.tie_break),
            n(est.estimate),
        ]);
    }
    Ok(out)
}

fn tail(a: &TailArgs, seed: u64) -> Result<Output> {
    if a.k_min_exp >= a.k_max_exp || a.k_max_exp > 40 {
        return Err(Error::Precondition(
            "need k_min_exp < k_max_exp <= 40".into(),
        ));
    }
    let q = a.q.unwrap_or(P_C);
    let fit = criticality::estimate_tail_exponent(
        q,
        &criticality::geometric_grid(a.k_min_exp, a.k_max_exp),
        a.replicas,
        seed,
        &TailOptions {
            discard_first_decade: !a.keep_first_decade,
            bootstrap: a.bootstrap,
            ..TailOptions::default()
        },
    )?;
    eprintln!("canyon: {}", fit.label);
    for w in &fit.warnings {
        eprintln!("canyon: warning: {w}");
    }
    let verdict = to_json(&fit.verdict).as_str().expect("verdict label").to_string();
    let opt = |x: Option<f64>| x.map_or(String::new(), n);
    let mut out = Output::new(
        &["q", "k", "survivors", "survival", "exponent", "stderr", "fit_quality", "verdict"],
        to_json(&fit),
    );
    for p in &fit.points {
        out.row(vec![
            n(q),
            i(p.k),
            i(p.survivors),
            n(p.survival),
            opt(fit.exponent),
            opt(fit.stderr),
            opt(fit.fit_quality),
            verdict.clone(),
        ]);
    }
    Ok(out)
}

fn growth(a: &GrowthArgs, seed: u64) -> Result<Output> {
    let r = criticality::empirical_growth(ExpPos::new(a.t)?, a.steps, seed)?;
    let mut out = Output::new(&["t", "q", "steps", "count", "rate", "bound", "margin"], to_json(&r));
    out.row(vec![
        n(r.t),
        n(r.q),
        i(r.steps),
        i(r.count),
        n(r.rate),
        n(r.bound),
        n(r.rate - r.bound),
    ]);
    Ok(out)
}

fn couple_test(a: &CoupleTestArgs, seed: u64) -> Result<Output> {
    let props: Vec<Property> = match a.property {
        PropertyArg::All => Property::ALL.to_vec(),
        PropertyArg::Inclusion => vec![Property::Inclusion],
        PropertyArg::OrderedDomination => vec![Property::OrderedDomination],
        PropertyArg::Restriction => vec![Property::Restriction],
    };
    let reports = props
        .into_iter()
        .map(|p| coupling::check(p, a.trials, a.steps, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::new(&["property", "trials", "steps", "checks", "violations"], to_json(&reports));
    for r in &reports {
        out.row(vec![
            r.property.label().into(),
            i(r.trials),
            i(r.steps),
            i(r.checks),
            i(r.violations),
        ]);
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| r.violations > 0)
        .map(|r| format!("{} violations of {}", r.violations, r.property.label()))
        .collect();
    if !failed.is_empty() {
        out.guard_failure = Some(failed.join(", "));
    }
    Ok(out)
}

fn survival(a: &SurvivalArgs, seed: u64) -> Result<Output> {
    let s = criticality::estimate_survival(a.q, a.horizon, a.replicas, seed)?;
    let mut out = Output::new(
        &["q", "horizon", "replicas", "survivors", "surviving_fraction", "ci_low", "ci_high"],
        to_json(&s),
    );
    out.row(vec![
        n(s.q),
        i(s.horizon),
        i(s.replicas),
        i(s.survivors),
        n(s.surviving_fraction),
        n(s.ci_low),
        n(s.ci_high),
    ]);
    Ok(out)
}

fn running_max(a: &RunningMaxArgs, seed: u64) -> Result<Output> {
    let r = criticality::running_max_min(seed, a.steps, a.window_start)?;
    let mut out = Output::new(&["seed", "steps", "window_start", "max_minimum", "p_c"], to_json(&r));
    out.row(vec![i(r.seed), i(r.steps), i(r.window_start), n(r.value), n(r.p_c)]);
    Ok(out)
}
