//! `relgw`: compute and cross-check maximal-tangency relative invariants.
//!
//! Exit codes: 0 success, 1 bad arguments, 2 invalid pair or recursion
//! hypothesis violated, 3 I/O or cache error, 4 verification failed.

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relgw::closed::PairKind;
use relgw::engine::{Engine, GeneralHEngine, InvariantTable};
use relgw::io::{read_cache, write_cache, ComputationReport};
use relgw::pair::{builtin_conic, builtin_line, load_custom, seed_degrees, RankOnePair};
use relgw::series::{a_from_f, b_from_f, lambert_w, TruncatedSeries};
use relgw::verify::{verify_table, VerifyOptions};

const CACHE_DIR_ENV: &str = "RELGW_CACHE_DIR";

#[derive(Parser)]
#[command(name = "relgw", version, about = "Relative Gromov-Witten invariants of rank-one surface pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the invariant table up to a degree.
    Compute(ComputeArgs),
    /// Cross-check the invariant table against every independent identity.
    Verify(VerifyArgs),
    /// Print a generating series of a built-in pair.
    Series(SeriesArgs),
    /// Show the intersection data and seeds of a pair.
    PairInfo(PairSource),
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Line,
    Conic,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PairSource {
    /// Built-in pair.
    #[arg(long, value_enum)]
    pair: Option<Builtin>,
    /// Pair config file (key = value format).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CacheArgs {
    /// Cache file; defaults to $RELGW_CACHE_DIR/<pair>.json when that variable is set.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    source: PairSource,
    #[arg(long)]
    max_degree: u32,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[command(flatten)]
    cache: CacheArgs,
    /// Use the general auxiliary-divisor recursion with H scaled by this factor.
    #[arg(long)]
    h_multiple: Option<u32>,
    /// Add an approximate decimal column (not authoritative).
    #[arg(long)]
    decimal: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: PairSource,
    #[arg(long)]
    max_degree: u32,
    /// Series checks run to q^order.
    #[arg(long, default_value_t = 20)]
    order: usize,
    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesKind {
    /// Generating series F.
    F,
    /// A = (d/dq - 1/q) F.
    A,
    /// B = (q d/dq) F / 4.
    B,
    /// Lambert series W(x).
    W,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long, value_enum)]
    pair: Builtin,
    #[arg(long, default_value_t = 20)]
    order: usize,
    #[arg(long, value_enum, default_value = "f")]
    kind: SeriesKind,
    #[arg(long, value_enum, default_value = "text")]
    format: SeriesFormat,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn args(m: impl Into<String>) -> Self {
        Self { code: 1, message: m.into() }
    }
    fn math(m: impl ToString) -> Self {
        Self { code: 2, message: m.to_string() }
    }
    fn io(m: impl ToString) -> Self {
        Self { code: 3, message: m.to_string() }
    }
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
    let result = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Verify(a) => verify(a),
        Command::Series(a) => series(a),
        Command::PairInfo(a) => pair_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::io(e)),
        _ => Ok(()),
    }
}

fn load_pair(source: &PairSource) -> Result<RankOnePair, Failure> {
    match (&source.pair, &source.config) {
        (Some(Builtin::Line), _) => Ok(builtin_line()),
        (Some(Builtin::Conic), _) => Ok(builtin_conic()),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            load_custom(&text).map_err(|e| Failure::math(format!("{}: {e}", path.display())))
        }
        (None, None) => Err(Failure::args("one of --pair or --config is required")),
    }
}

fn cache_path(args: &CacheArgs, pair: &RankOnePair) -> Option<PathBuf> {
    args.cache.clone().or_else(|| {
        std::env::var_os(CACHE_DIR_ENV).map(|dir| Path::new(&dir).join(format!("{}.json", pair.name())))
    })
}

/// Table for `1..=max_degree`, resuming from and updating the cache when one is configured.
fn cached_table(pair: &RankOnePair, max_degree: u32, cache: Option<&Path>) -> Result<InvariantTable, Failure> {
    let cached = match cache {
        Some(p) if p.exists() => Some(read_cache(p, pair).map_err(Failure::io)?),
        _ => None,
    };
    let known = cached.as_ref().map_or(0, InvariantTable::max_degree);
    let mut engine = match cached {
        Some(t) => Engine::from_table(t),
        None => Engine::new(pair.clone()),
    };
    let table = engine.table(max_degree).map_err(Failure::math)?;
    if let Some(p) = cache {
        if max_degree > known {
            write_cache(&engine.into_table(), p).map_err(Failure::io)?;
        }
    }
    Ok(table)
}

fn compute(args: ComputeArgs) -> Result<(), Failure> {
    if args.max_degree == 0 {
        return Err(Failure::args("--max-degree must be at least 1"));
    }
    let pair = load_pair(&args.source)?;
    let start = Instant::now();
    let table = match args.h_multiple {
        Some(0) => return Err(Failure::args("--h-multiple must be at least 1")),
        Some(m) => {
            let mut g = GeneralHEngine::new(pair.clone(), m).map_err(Failure::math)?;
            let values = (1..=args.max_degree)
                .map(|d| g.nbar(d).map(|v| (d, v)))
                .collect::<Result<_, _>>()
                .map_err(Failure::math)?;
            InvariantTable::from_values(pair.clone(), values).map_err(Failure::math)?
        }
        None => cached_table(&pair, args.max_degree, cache_path(&args.cache, &pair).as_deref())?,
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let report = ComputationReport::new(&table, elapsed, args.decimal, Vec::new());
    match args.format {
        TableFormat::Csv => emit(&report.to_csv()),
        TableFormat::Json => emit(&report.to_json()),
    }
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    if args.max_degree == 0 {
        return Err(Failure::args("--max-degree must be at least 1"));
    }
    if args.order < 3 {
        return Err(Failure::args("--order must be at least 3"));
    }
    let pair = load_pair(&args.source)?;
    let table = cached_table(&pair, args.max_degree, cache_path(&args.cache, &pair).as_deref())?;
    let opts = VerifyOptions { order: args.order, ..VerifyOptions::default() };
    let reports = verify_table(&table, &opts).map_err(Failure::math)?;
    let pass = reports.iter().all(|r| r.pass);
    let out = serde_json::json!({
        "pair": pair.name(),
        "max_degree": args.max_degree,
        "order": args.order,
        "pass": pass,
        "reports": reports,
    });
    emit(&(serde_json::to_string_pretty(&out).expect("report serializes") + "\n"))?;
    if pass {
        return Ok(());
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| match &r.discrepancy {
            Some(d) => format!("{} (at {})", r.identity, d.index),
            None => r.identity.clone(),
        })
        .collect();
    Err(Failure { code: 4, message: format!("verification failed: {}", failed.join(", ")) })
}

fn series(args: SeriesArgs) -> Result<(), Failure> {
    let kind = match args.pair {
        Builtin::Line => PairKind::Line,
        Builtin::Conic => PairKind::Conic,
    };
    // A loses one order to the shift, so build F one step further.
    let f_order = args.order + 1;
    let table = Engine::new(kind.pair())
        .table(kind.degree_for_order(f_order).max(1))
        .map_err(Failure::math)?;
    let f = relgw::closed::generating_series(kind, &table, f_order).map_err(Failure::math)?;
    let s: TruncatedSeries = match args.kind {
        SeriesKind::F => f.truncate(args.order),
        SeriesKind::A => a_from_f(&f).map_err(Failure::math)?,
        SeriesKind::B => b_from_f(&f).truncate(args.order),
        SeriesKind::W => lambert_w(args.order),
    };
    let text = match args.format {
        SeriesFormat::Text => s.to_string(),
        SeriesFormat::Json => serde_json::to_string(&s.to_strings()).expect("strings serialize"),
    };
    emit(&(text + "\n"))
}

fn pair_info(source: PairSource) -> Result<(), Failure> {
    let pair = load_pair(&source)?;
    let seeds: Vec<String> = seed_degrees(pair.kappa()).iter().map(u32::to_string).collect();
    emit(&format!(
        "{}# seed degrees: {}\n# -K_log.beta = {} d\n# D.beta = {} d\n",
        pair.to_config(),
        seeds.join(", "),
        -pair.kappa(),
        pair.delta()
    ))
}
