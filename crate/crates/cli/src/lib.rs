//! `tml`: command-line driver for the tml-core experiments.
//!
//! Every subcommand validates its parameters, runs one experiment and writes
//! a deterministic artifact (JSON with sorted keys, or CSV). Exit codes:
//! 0 success, 1 I/O or internal failure, 2 invalid arguments, 3 an audit
//! that did not meet its tolerance (the artifact is still written).

pub mod commands;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Validation(String),
    #[error("audit failed: {0}")]
    Audit(String),
    #[error("error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Audit(_) => EXIT_AUDIT,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<tml_core::Error> for CliError {
    fn from(e: tml_core::Error) -> Self {
        use tml_core::Error as E;
        match e {
            E::Io(_) | E::Json(_) | E::CacheFormat(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tml", version = VERSION, about = "Twisted moments laboratory")]
pub struct Cli {
    /// τ(n) cache file; reused when it covers the needed range, written otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    pub hecke_cache: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Identity audits for λ(n): Hecke relation, multiplicativity, divisor bound.
    Hecke(HeckeArgs),
    /// Mertens-type prime sums against the fitted constants.
    Primes(PrimesArgs),
    /// 2k-th moments over characters for every prime q in a range.
    Moments(MomentsArgs),
    /// Random multiplicative function audits.
    RmfVerify(RmfArgs),
    /// Mollifier schedule, length constraints and majorant audits.
    MollifierCheck(MollifierArgs),
    /// Character side against the random model side of the transfer identity.
    TransferCheck(TransferArgs),
    /// SVG plot of a moments CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct HeckeArgs {
    /// Table size; the prime identity is checked for p ≤ √limit.
    #[arg(long, default_value_t = 1_000_000)]
    pub limit: usize,
    /// Bound for the divisor-bound scan.
    #[arg(long, default_value_t = 100_000)]
    pub deligne_bound: u64,
    /// Number of random coprime pairs for multiplicativity.
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PrimesArgs {
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',', default_values_t = [1e4, 1e5, 1e6])]
    pub x: Vec<f64>,
    /// JSON file of constants (defaults to the bundled fit).
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Largest admissible |residual| · log x.
    #[arg(long, default_value_t = 5.0)]
    pub c_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XRuleArg {
    Sqrt,
    Fixed(u64),
}

fn parse_x_rule(s: &str) -> Result<XRuleArg, String> {
    match s {
        "sqrt" => Ok(XRuleArg::Sqrt),
        _ => s.parse::<u64>().ok().filter(|&x| x >= 1).map(XRuleArg::Fixed).ok_or_else(|| format!("expected `sqrt` or a positive integer, got `{s}`")),
    }
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad lower end `{a}`"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad upper end `{b}`"))?;
    if a < 3 || b < a {
        return Err(format!("need 3 ≤ LO ≤ HI, got {a}:{b}"));
    }
    Ok((a, b))
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Prime moduli LO:HI, inclusive.
    #[arg(long, value_parser = parse_range)]
    pub q_range: (u64, u64),
    #[arg(long)]
    pub k: f64,
    /// `sqrt` for x = ⌊√q⌋, or a fixed length.
    #[arg(long, value_parser = parse_x_rule, default_value = "sqrt")]
    pub x_rule: XRuleArg,
    /// Use this many primes near a geometric grid instead of every prime.
    #[arg(long)]
    pub count: Option<usize>,
    /// CSV output (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary with the loglog-slope fit.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Omit the runtime column so the CSV is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    #[value(name = "2.4")]
    EvenMoment,
    #[value(name = "2.5")]
    EulerProduct,
    #[value(name = "2.6")]
    Parseval,
    #[value(name = "transfer")]
    Transfer,
}

#[derive(Debug, Args)]
pub struct RmfArgs {
    #[arg(long, value_enum)]
    pub lemma: Lemma,
    /// Monte Carlo sample count (default depends on the lemma).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Upper prime bound for the Euler product battery.
    #[arg(long, default_value_t = 10_000.0)]
    pub y: f64,
    /// Number of randomized even-moment cases.
    #[arg(long, default_value_t = 24)]
    pub cases: usize,
    #[arg(long, default_value_t = 3)]
    pub max_j: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Desk,
    PaperFaithful,
}

#[derive(Debug, Args)]
pub struct MollifierArgs {
    #[arg(long, conflicts_with = "log_x", required_unless_present = "log_x")]
    pub x: Option<f64>,
    /// log x, for lengths beyond f64.
    #[arg(long)]
    pub log_x: Option<f64>,
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub c0: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Desk)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    pub jm_divisor: f64,
    #[arg(long, default_value_t = 1.0)]
    pub length_factor: f64,
    #[arg(long, default_value_t = 1.0)]
    pub estaj_factor: f64,
    /// Random D draws per distinct J_m in the majorization audit.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest y for which prime-mass audits are run.
    #[arg(long, default_value_t = 50_000_000.0)]
    pub sieve_limit: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[arg(long, default_value_t = 10_007)]
    pub q: u64,
    #[arg(long, default_value_t = 10)]
    pub x: u64,
    /// Single block (1, y].
    #[arg(long, default_value_t = 5.0)]
    pub y: f64,
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Compute both sides even when x·N ≥ q.
    #[arg(long)]
    pub no_enforce: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long)]
    pub k: f64,
    #[arg(long, default_value = "loglog_q")]
    pub x_col: String,
    #[arg(long, default_value = "log_ratio")]
    pub y_col: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("TML_THREADS") {
        let n: usize =
            v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Validation(format!("TML_THREADS = `{v}` is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Runtime(e.to_string()))
}

/// Parse `args` (program name first), dispatch, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match thread_pool().and_then(|pool| pool.install(|| commands::dispatch(&cli))) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("tml: {e}");
            e.exit_code()
        }
    }
}
