//! The `straus` command line. Every numeric option accepts plain
//! decimal, underscores, or scientific notation ("1e18"). Options may
//! also come from a `--config key=value` file; explicit flags win.
//!
//! Exit codes: 0 success, 1 usage, 2 broken input or output, 3 a failed
//! verification (counterexample, unsolved escapee, or conservation
//! break).

use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use straus_core::arith::is_prime;
use straus_core::bradford::count_solutions;
use straus_core::filter::{build_filter, Basis, CoverageEngine, IdentityIndex};
use straus_core::identity::enumerate_db;
use straus_core::residue::build_system;
use straus_core::search::direct_search;

use crate::config::{self, Config};
use crate::formats;
use crate::pipeline::{self, PipelineError, VerifyOptions};

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}

enum CliError {
    Usage(String),
    Data(String),
    Failed(String),
}

impl From<formats::FormatError> for CliError {
    fn from(e: formats::FormatError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(format!("io: {e}"))
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Conservation(_) => CliError::Failed(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Usage(msg)
    }
}

#[derive(Parser)]
#[command(
    name = "straus",
    version,
    about = "Verification toolkit for three-unit-fraction decompositions of 4/n"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the identity database up to a parameter bound
    Identities(IdentitiesArgs),
    /// Build the filter for one modulus
    Filter(FilterArgs),
    /// Combine filters over coprime moduli into a residue system
    Residues(ResiduesArgs),
    /// Verify a range in batches against a filter bank
    Verify(VerifyArgs),
    /// Count solutions for one prime by divisor sweep
    Count(CountArgs),
    /// Find a decomposition of 4/n for one integer
    Solve(SolveArgs),
    /// Export per-prime counts for the first difficult primes as CSV
    Plotdata(PlotdataArgs),
    /// Count difficult primes up to a limit
    Stats(StatsArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// key=value file supplying defaults for the other options
    #[arg(long, global = false)]
    config: Option<PathBuf>,
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, CliError> {
    match path {
        Some(p) => Ok(config::load(p)?),
        None => Ok(Config::new()),
    }
}

fn require(value: Option<u64>, key: &str) -> Result<u64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{key} is required")))
}

#[derive(Args)]
struct IdentitiesArgs {
    /// Parameter bound for enumeration
    #[arg(long)]
    bound: Option<String>,
    /// Write the database to this file
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FilterArgs {
    /// Modulus to build the filter for
    #[arg(long)]
    modulus: Option<String>,
    /// Identity database bound
    #[arg(long)]
    bound: Option<String>,
    /// Refinement depth
    #[arg(long)]
    depth: Option<String>,
    /// Write covered residues to this file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write certificates to this file
    #[arg(long)]
    certs: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ResiduesArgs {
    /// Comma-separated pairwise coprime moduli, e.g. 8,3,5,7
    #[arg(long)]
    moduli: Option<String>,
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// Write the residue system to this file
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated system moduli, e.g. 8,3,5,7,11,13
    #[arg(long)]
    moduli: Option<String>,
    /// Verify every n in 2..=limit
    #[arg(long)]
    limit: Option<String>,
    /// Total filters in the probe bank
    #[arg(long)]
    bank_size: Option<String>,
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Batches between probe reorderings and checkpoints
    #[arg(long)]
    reorder_interval: Option<String>,
    /// Checkpoint file for resume
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Escapee CSV log
    #[arg(long)]
    escapees: Option<PathBuf>,
    /// Stop after this many batches in this invocation
    #[arg(long)]
    max_batches: Option<String>,
    /// Build the bank and system, report the plan, and stop
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CountArgs {
    /// Odd prime below 2^32
    #[arg(long)]
    prime: Option<String>,
    /// Emit one p,x,d,type,y,z row per qualifying candidate
    #[arg(long)]
    per_x: bool,
    /// Write the per-candidate rows to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SolveArgs {
    /// The denominator n in 4/n
    #[arg(long)]
    n: String,
}

#[derive(Args)]
struct PlotdataArgs {
    /// How many difficult primes to export
    #[arg(long)]
    count: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct StatsArgs {
    /// Upper bound of the census
    #[arg(long)]
    limit: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Identities(args) => identities(args),
        Command::Filter(args) => filter(args),
        Command::Residues(args) => residues(args),
        Command::Verify(args) => verify(args),
        Command::Count(args) => count(args),
        Command::Solve(args) => solve(args),
        Command::Plotdata(args) => plotdata(args),
        Command::Stats(args) => stats(args),
    }
}

fn identities(args: IdentitiesArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.common.config)?;
    let bound = config::resolve_magnitude(args.bound.as_deref(), &cfg, "bound", Some(50))?
        .expect("default");
    let db = enumerate_db(bound);
    println!("identities: {} classes, parameter bound {}", db.len(), bound);
    if let Some(path) = config::resolve_path(args.out, &cfg, "out") {
        formats::write_identities(&path, &db)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn filter(args: FilterArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.common.config)?;
    let modulus = require(
        config::resolve_magnitude(args.modulus.as_deref(), &cfg, "modulus", None)?,
        "modulus",
    )?;
    if modulus == 0 {
        return Err(CliError::Usage("--modulus must be positive".into()));
    }
    let bound = config::resolve_magnitude(args.bound.as_deref(), &cfg, "bound", Some(50))?
        .expect("default");
    let depth = config::resolve_magnitude(args.depth.as_deref(), &cfg, "depth", Some(5))?
        .expect("default") as usize;
    let index = IdentityIndex::new(enumerate_db(bound));
    let basis = Basis::new(bound, depth);
    let mut engine = CoverageEngine::new(&index, &basis);
    let built = build_filter(modulus, &mut engine);
    println!(
        "filter m={}: {} of {} residues covered",
        modulus,
        built.len(),
        modulus
    );
    if let Some(path) = config::resolve_path(args.out, &cfg, "out") {
        formats::write_filter(&path, &built, &basis)?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = config::resolve_path(args.certs, &cfg, "certs") {
        formats::write_certs(&path, &built, &basis)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn residues(args: ResiduesArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.common.config)?;
    let moduli = config::resolve_moduli(args.moduli.as_deref(), &cfg, "moduli")?
        .ok_or_else(|| CliError::Usage("--moduli is required".into()))?;
    let bound = config::resolve_magnitude(args.bound.as_deref(), &cfg, "bound", Some(50))?
        .expect("default");
    let depth = config::resolve_magnitude(args.depth.as_deref(), &cfg, "depth", Some(5))?
        .expect("default") as usize;
    let index = IdentityIndex::new(enumerate_db(bound));
    let basis = Basis::new(bound, depth);
    let mut engine = CoverageEngine::new(&index, &basis);
    let filters: Vec<_> = moduli
        .iter()
        .map(|&m| build_filter(m, &mut engine))
        .collect();
    let system = build_system(&filters, &index)
        .map_err(|e| CliError::Data(format!("residue system: {e}")))?;
    println!(
        "system: G={} classes={} efficiency={}",
        system.grand_modulus(),
        system.residues().len(),
        system.efficiency_display()
    );
    if let Some(path) = config::resolve_path(args.out, &cfg, "out") {
        formats::write_system(&path, &system)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.common.config)?;
    let moduli = config::resolve_moduli(args.moduli.as_deref(), &cfg, "moduli")?
        .ok_or_else(|| CliError::Usage("--moduli is required".into()))?;
    let limit = require(
        config::resolve_magnitude(args.limit.as_deref(), &cfg, "limit", None)?,
        "limit",
    )?;
    if limit < 2 {
        return Err(CliError::Usage("--limit must be at least 2".into()));
    }
    let mut opts = VerifyOptions::new(moduli, limit);
    opts.bank_size = config::resolve_magnitude(args.bank_size.as_deref(), &cfg, "bank-size", Some(500))?
        .expect("default") as usize;
    opts.bound = config::resolve_magnitude(args.bound.as_deref(), &cfg, "bound", Some(8000))?
        .expect("default");
    opts.depth = config::resolve_magnitude(args.depth.as_deref(), &cfg, "depth", Some(5))?
        .expect("default") as usize;
    opts.workers = config::resolve_magnitude(args.workers.as_deref(), &cfg, "workers", Some(4))?
        .expect("default") as usize;
    opts.reorder_interval = config::resolve_magnitude(
        args.reorder_interval.as_deref(),
        &cfg,
        "reorder-interval",
        Some(100),
    )?
    .expect("default");
    opts.checkpoint = config::resolve_path(args.checkpoint, &cfg, "checkpoint");
    opts.escapees = config::resolve_path(args.escapees, &cfg, "escapees");
    opts.max_batches =
        config::resolve_magnitude(args.max_batches.as_deref(), &cfg, "max-batches", None)?;
    opts.dry_run = config::resolve_switch(args.dry_run, &cfg, "dry-run")?;
    if opts.workers == 0 || opts.reorder_interval == 0 {
        return Err(CliError::Usage(
            "--workers and --reorder-interval must be positive".into(),
        ));
    }

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let outcome = pipeline::run_verification(&opts, &mut out)?;
    out.flush()?;
    if let Some(n) = outcome.counterexample {
        return Err(CliError::Failed(format!(
            "counterexample candidate n={n} survived all filters and direct search"
        )));
    }
    Ok(0)
}

fn count(args: CountArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.common.config)?;
    let p = require(
        config::resolve_magnitude(args.prime.as_deref(), &cfg, "prime", None)?,
        "prime",
    )?;
    if p < 5 || p % 2 == 0 || p >= 1 << 32 || !is_prime(p) {
        return Err(CliError::Usage(format!(
            "--prime must be an odd prime in 5..2^32, got {p}"
        )));
    }
    let c = count_solutions(p);
    println!(
        "f({p})={} type1={} type2={} both={} divisors={}",
        c.f, c.f1, c.f2, c.both, c.de
    );
    if config::resolve_switch(args.per_x, &cfg, "per-x")? {
        let rows = pipeline::candidate_rows(p);
        match config::resolve_path(args.out, &cfg, "out") {
            Some(path) => {
                formats::write_candidates(&path, p, &rows)?;
                println!("wrote {} rows to {}", rows.len(), path.display());
            }
            None => {
                println!("p,x,d,type,y,z");
                for r in &rows {
                    println!("{p},{},{},{},{},{}", r.x, r.d, r.kind, r.triple.y, r.triple.z);
                }
            }
        }
    }
    Ok(0)
}

fn solve(args: SolveArgs) -> Result<i32, CliError> {
    let n = config::parse_magnitude(&args.n)
        .ok_or_else(|| CliError::Usage(format!("invalid n: {}", args.n)))?;
    if n < 2 {
        return Err(CliError::Usage("n must be at least 2".into()));
    }
    match direct_search(n) {
        Some(t) => {
            println!("4/{n} = 1/{} + 1/{} + 1/{}", t.x, t.y, t.z);
            Ok(0)
        }
        None => Err(CliError::Failed(format!("no decomposition found for {n}"))),
    }
}

fn plotdata(args: PlotdataArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.common.config)?;
    let count = config::resolve_magnitude(args.count.as_deref(), &cfg, "count", Some(300))?
        .expect("default") as usize;
    let out = config::resolve_path(args.out, &cfg, "out")
        .unwrap_or_else(|| PathBuf::from("plot.csv"));
    let mut limit = 100_000u64;
    let mut primes = pipeline::census(limit);
    while primes.len() < count {
        limit *= 2;
        primes = pipeline::census(limit);
    }
    primes.truncate(count);
    let rows = pipeline::trend_rows(&primes);
    let plot: Vec<_> = rows
        .iter()
        .map(|r| (r.index, r.p, r.f1, r.f2, r.f))
        .collect();
    formats::write_plot(&out, &plot)?;
    let (f1, f2, both, f) = rows.iter().fold((0, 0, 0, 0), |acc, r| {
        (acc.0 + r.f1, acc.1 + r.f2, acc.2 + r.both, acc.3 + r.f)
    });
    println!("wrote {} rows to {}", rows.len(), out.display());
    println!("sums: f1={f1} f2={f2} both={both} f={f}");
    Ok(0)
}

fn stats(args: StatsArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.common.config)?;
    let limit = require(
        config::resolve_magnitude(args.limit.as_deref(), &cfg, "limit", None)?,
        "limit",
    )?;
    let primes = pipeline::census(limit);
    println!("difficult primes <= {}: {}", limit, primes.len());
    if let (Some(first), Some(last)) = (primes.first(), primes.last()) {
        println!("first={first} last={last}");
    }
    Ok(0)
}
