//! `che`: trace generation, cache replay, hit-ratio estimates, replicated
//! sweeps and Monte Carlo validation from the command line.
//!
//! Every verb reads the same `key = value` settings: first the `--config`
//! file, then any flag that mirrors a key (`--gamma-list` sets `gamma_list`).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use che::analytics::Estimate;
use che::cache::{lru_replay, ttl_replay, write_stats_csv, write_ttl_stats_csv, SimStats};
use che::experiment::{
    margin_from, model_from, quadrature_from, run_sweep, size_simulation_time, write_sweep_csv, Assignments,
    ExperimentConfig, SimTime, SweepResult,
};
use che::oracle::{mc_exit_time_law, mc_ttl_misses, write_reports_csv, OracleReport};
use che::{generate_trace_with, AnalyticModel, RequestTrace, TraceOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "che",
    version,
    about = "LRU/TTL cache simulation and hit-ratio estimates for Poisson cluster traffic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    keys: KeyArgs,
    /// Settings file with one `key = value` per line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

/// Flags that override keys of the settings file.
#[derive(Args, Default)]
struct KeyArgs {
    /// Catalog rates, comma separated.
    #[arg(long, global = true)]
    gamma_list: Option<String>,
    /// Cache sizes, comma separated.
    #[arg(long, global = true)]
    capacity_list: Option<String>,
    /// Mean sojourn times C/gamma, comma separated.
    #[arg(long, global = true)]
    theta_list: Option<String>,
    /// Request-rate law: `lomax(alpha, sigma)` or `fixed(x)`.
    #[arg(long, global = true)]
    rho: Option<String>,
    /// Lifespan law: `lomax(alpha, sigma)` or `fixed(x)`.
    #[arg(long, global = true)]
    lifespan: Option<String>,
    /// `box` or `exponential`.
    #[arg(long, global = true)]
    shape: Option<String>,
    #[arg(long, global = true)]
    replications: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Simulated duration or `auto`.
    #[arg(long, global = true)]
    sim_time: Option<String>,
    #[arg(long, global = true)]
    sim_time_cap: Option<String>,
    #[arg(long, global = true)]
    sizing_threshold: Option<String>,
    /// `stationary`, `auto` or a duration.
    #[arg(long, global = true)]
    margin: Option<String>,
    /// Also compute the Gamma-quadrature hit ratio (`true`/`false`).
    #[arg(long, global = true)]
    exact: Option<String>,
    #[arg(long, global = true)]
    rel_tol: Option<String>,
    #[arg(long, global = true)]
    abs_tol: Option<String>,
    #[arg(long, global = true)]
    max_depth: Option<String>,
    #[arg(long, global = true)]
    tail_mass_cut: Option<String>,
}

impl KeyArgs {
    fn pairs(&self) -> [(&'static str, &Option<String>); 17] {
        [
            ("gamma_list", &self.gamma_list),
            ("capacity_list", &self.capacity_list),
            ("theta_list", &self.theta_list),
            ("rho", &self.rho),
            ("lifespan", &self.lifespan),
            ("shape", &self.shape),
            ("replications", &self.replications),
            ("seed", &self.seed),
            ("sim_time", &self.sim_time),
            ("sim_time_cap", &self.sim_time_cap),
            ("sizing_threshold", &self.sizing_threshold),
            ("margin", &self.margin),
            ("exact", &self.exact),
            ("rel_tol", &self.rel_tol),
            ("abs_tol", &self.abs_tol),
            ("max_depth", &self.max_depth),
            ("tail_mass_cut", &self.tail_mass_cut),
        ]
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate one request trace on (0, sim_time) and write it as CSV.
    Generate,
    /// Replay a trace through LRU caches (capacity_list) or TTL caches.
    Simulate(SimulateArgs),
    /// Analytic hit-ratio estimates for every (gamma, C) of the grid.
    Estimate,
    /// Replicated LRU simulation next to the estimates, one CSV row per cell.
    Sweep,
    /// Monte Carlo checks of the analytic layer.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Lru,
    Ttl,
}

#[derive(Args)]
struct SimulateArgs {
    /// Trace CSV to replay; generated from the settings when absent.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lru")]
    policy: Policy,
    /// TTL eviction times, comma separated.
    #[arg(long)]
    ttl_list: Option<String>,
    /// Append per-document tallies (LRU only).
    #[arg(long)]
    per_doc: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    /// Sampled TTL misses per document against m(t).
    Ttl,
    /// Empirical LRU exit times against the Gamma law of gamma M(t).
    ExitLaw,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "ttl")]
    check: Check,
    /// TTL values for `--check ttl`, comma separated.
    #[arg(long, default_value = "0.01,0.1,1")]
    ttl_list: String,
    /// Documents for `ttl`, traces for `exit-law`.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Largest acceptable |z| for `ttl`.
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    /// Smallest acceptable KS p-value for `exit-law`.
    #[arg(long, default_value_t = 0.01)]
    p_min: f64,
    /// Request time s of the tagged document for `exit-law`.
    #[arg(long, default_value_t = 1.0)]
    start: f64,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<che::Error> for Failure {
    fn from(e: che::Error) -> Self {
        match e {
            che::Error::Config(msg) => Failure::Config(msg),
            che::Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn settings(cli: &Cli) -> Result<Assignments, Failure> {
    let mut a = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            Assignments::parse(&text)?
        }
        None => Assignments::default(),
    };
    for (key, value) in cli.keys.pairs() {
        if let Some(v) = value {
            a.set(key, v.as_str())?;
        }
    }
    if let Some(out) = &cli.out {
        a.set("output", out.display().to_string())?;
    }
    Ok(a)
}

fn output(a: &Assignments) -> Result<Box<dyn Write>, Failure> {
    Ok(match a.get("output") {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| config_error(format!("{key}: `{s}` is not a non-negative number")))
        })
        .collect()
}

fn single_gamma(a: &Assignments) -> Result<f64, Failure> {
    let text = a
        .get("gamma_list")
        .ok_or_else(|| config_error("gamma_list is required"))?;
    match parse_list("gamma_list", text)?.as_slice() {
        [g] if *g > 0.0 => Ok(*g),
        [_] => Err(config_error("gamma_list: the rate must be > 0")),
        _ => Err(config_error("this verb takes a single rate in gamma_list")),
    }
}

fn seed(a: &Assignments) -> Result<u64, Failure> {
    a.get("seed").map_or(Ok(0), |s| {
        s.parse()
            .map_err(|_| config_error(format!("seed: `{s}` is not an unsigned integer")))
    })
}

/// Generates the trace described by the settings (single rate).
fn trace_from_settings(a: &Assignments) -> Result<RequestTrace, Failure> {
    let gamma = single_gamma(a)?;
    let model = model_from(a)?;
    let q = quadrature_from(a)?;
    let sim_time = match a.get("sim_time") {
        None | Some("auto") => {
            let cap = a
                .get("sim_time_cap")
                .map_or(Ok(20_000.0), |v| parse_one("sim_time_cap", v))?;
            let threshold = a
                .get("sizing_threshold")
                .map_or(Ok(1e-3), |v| parse_one("sizing_threshold", v))?;
            let s = size_simulation_time(&model, gamma, threshold, cap, &q)?;
            log::info!("sim_time {} (K_alpha {}, capped {})", s.sim_time, s.k_alpha, s.capped);
            s.sim_time
        }
        Some(v) => parse_one("sim_time", v)?,
    };
    let options = TraceOptions {
        margin: margin_from(a, &model)?,
        ..TraceOptions::default()
    };
    let trace = generate_trace_with(gamma, &model, (0.0, sim_time), seed(a)?, &options)?;
    log::info!(
        "{} requests from {} documents on (0, {sim_time})",
        trace.len(),
        trace.diagnostics.documents_sampled - trace.diagnostics.empty_documents
    );
    Ok(trace)
}

fn parse_one(key: &str, v: &str) -> Result<f64, Failure> {
    match parse_list(key, v)?.as_slice() {
        [x] if *x > 0.0 => Ok(*x),
        _ => Err(config_error(format!("{key}: expected one positive number"))),
    }
}

fn generate(a: &Assignments) -> Outcome {
    let trace = trace_from_settings(a)?;
    let mut out = output(a)?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn simulate(a: &Assignments, args: &SimulateArgs) -> Outcome {
    let trace = match &args.trace {
        Some(path) => RequestTrace::read_csv(BufReader::new(open(path)?), None)?,
        None => trace_from_settings(a)?,
    };
    let mut out = output(a)?;
    match args.policy {
        Policy::Lru => {
            let text = a
                .get("capacity_list")
                .ok_or_else(|| config_error("capacity_list is required for LRU"))?;
            let mut caps = Vec::new();
            for s in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match s.parse::<usize>() {
                    Ok(c) if c >= 1 => caps.push(c),
                    _ => return Err(config_error(format!("capacity_list: `{s}` is not a positive integer"))),
                }
            }
            if caps.is_empty() {
                return Err(config_error("capacity_list: empty list"));
            }
            let stats: Vec<SimStats> = caps
                .iter()
                .map(|&c| lru_replay(trace.events(), c, args.per_doc))
                .collect::<che::Result<_>>()?;
            let rows: Vec<(usize, &SimStats)> = caps.iter().copied().zip(&stats).collect();
            write_stats_csv(&mut out, &rows, args.per_doc)?;
        }
        Policy::Ttl => {
            let text = args
                .ttl_list
                .as_deref()
                .ok_or_else(|| config_error("--ttl-list is required for TTL"))?;
            let ttls = parse_list("ttl_list", text)?;
            if ttls.is_empty() {
                return Err(config_error("ttl_list: empty list"));
            }
            let stats: Vec<SimStats> = ttls
                .iter()
                .map(|&t| ttl_replay(trace.events(), t, false))
                .collect::<che::Result<_>>()?;
            let rows: Vec<(f64, &SimStats)> = ttls.iter().copied().zip(&stats).collect();
            write_ttl_stats_csv(&mut out, &rows)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::Runtime(format!("cannot open {}: {e}", path.display())))
}

fn estimate(a: &Assignments) -> Outcome {
    let config = ExperimentConfig::from_assignments(a)?;
    let model = AnalyticModel::from_intensity(&config.model);
    let rows: Vec<Estimate> = config
        .cells()?
        .iter()
        .map(|c| Estimate::compute(c.gamma, c.capacity as f64, &model, &config.quadrature, config.exact))
        .collect::<che::Result<_>>()?;
    let mut out = output(a)?;
    che::analytics::write_estimates_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

/// `key = value` lines describing how the sweep was sized and what failed.
fn sweep_metadata(config: &ExperimentConfig, result: &SweepResult) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "seed = {}\nreplications = {}\n",
        config.seed, config.replications
    ));
    s.push_str(&format!(
        "model = {} / {}\n",
        config.model.rho_law, config.model.lifespan_law
    ));
    if config.sim_time == SimTime::Auto {
        s.push_str("sizing = K_alpha = sigma_L (Gamma(2 - alpha) |cos(pi alpha / 2)| / (alpha - 1))^(1/alpha)\n");
    }
    for (gamma, sizing) in &result.sizing {
        if let Some(z) = sizing {
            s.push_str(&format!(
                "gamma {gamma}: sim_time = {}, k_alpha = {}, documents = {}, stable_time = {}, coverage_time = {}, capped = {}\n",
                z.sim_time, z.k_alpha, z.documents, z.stable_time, z.coverage_time, z.capped
            ));
        }
    }
    for f in &result.failures {
        s.push_str(&format!(
            "failure gamma {} C {:?} replication {:?}: {}\n",
            f.gamma, f.capacity, f.replication, f.message
        ));
    }
    s
}

fn sweep(a: &Assignments) -> Outcome {
    let config = ExperimentConfig::from_assignments(a)?;
    let result = run_sweep(&config)?;
    let meta = sweep_metadata(&config, &result);
    match &config.output_path {
        Some(path) => {
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta");
            std::fs::write(&meta_path, &meta)?;
        }
        None => eprint!("{meta}"),
    }
    for f in &result.failures {
        log::warn!(
            "gamma {} C {:?} replication {:?}: {}",
            f.gamma,
            f.capacity,
            f.replication,
            f.message
        );
    }
    let mut out = output(a)?;
    write_sweep_csv(&mut out, &result.rows)?;
    out.flush()?;
    Ok(())
}

fn oracle(a: &Assignments, args: &OracleArgs) -> Outcome {
    let model = model_from(a)?;
    let q = quadrature_from(a)?;
    let seed = seed(a)?;
    let mut out = output(a)?;
    match args.check {
        Check::Ttl => {
            let ttls = parse_list("ttl_list", &args.ttl_list)?;
            let mut rows: Vec<(String, OracleReport)> = Vec::new();
            for (i, &t) in ttls.iter().enumerate() {
                let r = mc_ttl_misses(&model, t, args.samples, seed.wrapping_add(i as u64), &q)?;
                log::info!("m({t}): {r}");
                rows.push((format!("m({t})"), r));
            }
            write_reports_csv(&mut out, &rows)?;
            out.flush()?;
            let bad: Vec<&str> = rows
                .iter()
                .filter(|(_, r)| !r.passes(args.z_max))
                .map(|(n, _)| n.as_str())
                .collect();
            if !bad.is_empty() {
                return Err(Failure::Runtime(format!("|z| > {} for {}", args.z_max, bad.join(", "))));
            }
        }
        Check::ExitLaw => {
            let gamma = single_gamma(a)?;
            let capacity = match a.get("capacity_list").map(|s| s.trim().parse::<usize>()) {
                Some(Ok(c)) if c >= 1 => c,
                _ => return Err(config_error("exit-law needs a single capacity in capacity_list")),
            };
            let n_reps = usize::try_from(args.samples).map_err(|_| config_error("samples too large"))?;
            let margin = margin_from(a, &model)?;
            let r = mc_exit_time_law(gamma, &model, capacity, args.start, n_reps, seed, margin, &q)?;
            writeln!(out, "gamma,C,start,n_reps,n_censored,horizon,ks_statistic,p_value")?;
            writeln!(
                out,
                "{gamma},{capacity},{},{},{},{},{},{}",
                args.start, r.n_reps, r.n_censored, r.horizon, r.ks_statistic, r.p_value
            )?;
            out.flush()?;
            if r.excessive_censoring {
                return Err(Failure::Runtime(format!(
                    "{} of {} exit times censored",
                    r.n_censored, r.n_reps
                )));
            }
            if r.p_value < args.p_min {
                return Err(Failure::Runtime(format!(
                    "KS p-value {} below {}",
                    r.p_value, args.p_min
                )));
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    let a = settings(cli)?;
    match &cli.command {
        Command::Generate => generate(&a),
        Command::Simulate(args) => simulate(&a, args),
        Command::Estimate => estimate(&a),
        Command::Sweep => sweep(&a),
        Command::Oracle(args) => oracle(&a, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("che: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("che: {msg}");
            ExitCode::from(1)
        }
    }
}
