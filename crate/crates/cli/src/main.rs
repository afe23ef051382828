//! `rangefilter` command-line tool.
//!
//! Exit codes: 0 for a non-empty query answer (and for success elsewhere), 1 for an empty
//! answer, 2 for invalid input or configuration, 3 for a query longer than the filter's `L`,
//! 4 for I/O failures and 5 for unreadable filter files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rangefilter::lowerbound::run_trial;
use rangefilter::{
    epsilon, epsilon_from_f64, measure_fpr, BloomBaseline, Epsilon, Interval, Params, PointSet, Probes,
    RangeEmptiness, RangeFilter, SortedOracle,
};
use serde::Serialize;

const EXIT_INVALID: u8 = 2;
const EXIT_TOO_LONG: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_BAD_FILTER: u8 = 5;

#[derive(Parser)]
#[command(name = "rangefilter", version, about = "Approximate range emptiness filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a filter from a point file (.txt: one decimal per line; .u64: little-endian words).
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        universe_bits: u32,
        #[arg(long)]
        max_len: u64,
        /// False positive rate, as a decimal (0.01) or a fraction (1/64).
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Ask whether [a, b] may contain a point. Exit 0 for non-empty, 1 for empty.
    Query {
        filter: PathBuf,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
    },
    /// Measure the false positive rate on random empty intervals.
    Fpr {
        filter: PathBuf,
        /// The point file the filter was built from.
        #[arg(long)]
        points: PathBuf,
        /// Interval length; defaults to the filter's L.
        #[arg(long)]
        len: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the space breakdown of a filter file.
    Space {
        filter: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare query latency and probe counts with the Bloom baseline.
    Bench {
        filter: PathBuf,
        #[arg(long)]
        points: PathBuf,
        /// Interval lengths; defaults to 1, L/4 and L.
        #[arg(long, value_delimiter = ',')]
        lens: Vec<u64>,
        #[arg(long, default_value_t = 10_000)]
        queries: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Encode random well-separated sets through a filter and decode them; one JSON line per set.
    LbDemo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        universe_bits: u32,
        #[arg(long)]
        len: u64,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 10)]
        sets: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure { code, error: error.into() }
    }
}

impl From<rangefilter::Error> for Failure {
    fn from(e: rangefilter::Error) -> Self {
        let code = match e {
            rangefilter::Error::IntervalTooLong { .. } => EXIT_TOO_LONG,
            rangefilter::Error::Decode(_) => EXIT_BAD_FILTER,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e)
    }
}

type CmdResult<T = ExitCode> = Result<T, Failure>;

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_INVALID, anyhow!("{msg}"))
}

fn parse_epsilon(s: &str) -> CmdResult<Epsilon> {
    let eps = match s.split_once('/') {
        Some((num, den)) => {
            let num = num.trim().parse().map_err(|_| invalid(format!("bad epsilon numerator in {s:?}")))?;
            let den = den.trim().parse().map_err(|_| invalid(format!("bad epsilon denominator in {s:?}")))?;
            epsilon(num, den)?
        }
        None => epsilon_from_f64(s.trim().parse().map_err(|_| invalid(format!("bad epsilon {s:?}")))?)?,
    };
    Ok(eps)
}

fn read_file(path: &Path) -> CmdResult<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display())).map_err(|e| Failure::new(EXIT_IO, e))
}

fn read_points(path: &Path) -> CmdResult<Vec<u64>> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext != "txt" && ext != "u64" {
        return Err(invalid(format!("{}: point files must end in .txt or .u64", path.display())));
    }
    let bytes = read_file(path)?;
    if ext == "u64" {
        if bytes.len() % 8 != 0 {
            return Err(invalid(format!("{}: length is not a multiple of 8 bytes", path.display())));
        }
        return Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect());
    }
    let text = String::from_utf8(bytes).map_err(|_| invalid(format!("{}: not UTF-8 text", path.display())))?;
    let mut pts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let x = line
            .parse()
            .map_err(|_| invalid(format!("{}:{}: {line:?} is not an unsigned integer", path.display(), lineno + 1)))?;
        pts.push(x);
    }
    Ok(pts)
}

fn load_filter(path: &Path) -> CmdResult<RangeFilter> {
    let bytes = read_file(path)?;
    RangeFilter::from_bytes(&bytes)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(|e| Failure::new(EXIT_BAD_FILTER, e))
}

fn load_points_for(filter: &RangeFilter, path: &Path) -> CmdResult<Vec<u64>> {
    let set = PointSet::from_unsorted(read_points(path)?, filter.params().universe_bits())?;
    if set.len() as u64 != filter.params().n() {
        return Err(invalid(format!(
            "{} holds {} points but the filter was built for {}",
            path.display(),
            set.len(),
            filter.params().n()
        )));
    }
    Ok(set.into_vec())
}

fn emit<T: Serialize>(value: &T, format: Format) {
    let json = serde_json::to_value(value).expect("reports serialize");
    let rows = match &json {
        serde_json::Value::Array(rows) => rows.clone(),
        other => vec![other.clone()],
    };
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json).expect("reports serialize")),
        Format::Csv => {
            if let Some(serde_json::Value::Object(first)) = rows.first() {
                println!("{}", first.keys().cloned().collect::<Vec<_>>().join(","));
            }
            for row in &rows {
                if let serde_json::Value::Object(map) = row {
                    println!("{}", map.values().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
                }
            }
        }
        Format::Text => {
            for (k, row) in rows.iter().enumerate() {
                if k > 0 {
                    println!();
                }
                if let serde_json::Value::Object(map) = row {
                    let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
                    for (key, v) in map {
                        println!("{key:width$}  {v}");
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    input: &Path,
    universe_bits: u32,
    max_len: u64,
    eps: &str,
    seed: u64,
    out: &Path,
    format: Format,
) -> CmdResult {
    let eps = parse_epsilon(eps)?;
    let set = PointSet::from_unsorted(read_points(input)?, universe_bits)
        .with_context(|| format!("reading points from {}", input.display()))
        .map_err(|e| Failure::new(EXIT_INVALID, e))?;
    let params = Params::new(universe_bits, max_len, eps, set.len() as u64, seed)?;
    let filter = RangeFilter::build(&set, params)?;
    fs::write(out, filter.to_bytes())
        .with_context(|| format!("writing {}", out.display()))
        .map_err(|e| Failure::new(EXIT_IO, e))?;
    emit(&filter.space_report(), format);
    Ok(ExitCode::SUCCESS)
}

fn cmd_query(path: &Path, a: u64, b: u64) -> CmdResult {
    let filter = load_filter(path)?;
    let interval = Interval::new(a, b)?;
    if filter.query(interval)? {
        println!("non-empty");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("empty");
        Ok(ExitCode::from(1))
    }
}

fn cmd_fpr(path: &Path, points: &Path, len: Option<u64>, trials: u64, seed: u64, format: Format) -> CmdResult {
    let filter = load_filter(path)?;
    let pts = load_points_for(&filter, points)?;
    let p = filter.params();
    let len = len.unwrap_or(p.max_len());
    if len == 0 || len > p.max_len() {
        return Err(Failure::new(EXIT_TOO_LONG, anyhow!("--len {len} is not in 1..={}", p.max_len())));
    }
    let report = measure_fpr(&filter, &SortedOracle::new(pts), p.universe_bits(), p.epsilon_f64(), len, trials, seed)?;
    emit(&report, format);
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BenchRow {
    structure: &'static str,
    len: u64,
    queries: u64,
    median_ns: u64,
    p99_ns: u64,
    mean_probes: f64,
    max_probes: u64,
    positives: u64,
}

fn bench_one<S: RangeEmptiness>(
    name: &'static str,
    s: &S,
    intervals: &[Interval],
    probes_of: fn(&Probes) -> u64,
) -> CmdResult<BenchRow> {
    let mut times = Vec::with_capacity(intervals.len());
    let (mut total, mut max, mut positives) = (0u64, 0u64, 0u64);
    for &i in intervals {
        let mut p = Probes::default();
        let start = Instant::now();
        let hit = s.query_counted(i, &mut p)?;
        times.push(start.elapsed().as_nanos() as u64);
        positives += hit as u64;
        total += probes_of(&p);
        max = max.max(probes_of(&p));
    }
    times.sort_unstable();
    let pick = |q: f64| times.get(((times.len() as f64 - 1.0) * q).round() as usize).copied().unwrap_or(0);
    Ok(BenchRow {
        structure: name,
        len: intervals.first().map_or(0, |i| i.len() as u64),
        queries: intervals.len() as u64,
        median_ns: pick(0.5),
        p99_ns: pick(0.99),
        mean_probes: total as f64 / intervals.len().max(1) as f64,
        max_probes: max,
        positives,
    })
}

fn cmd_bench(path: &Path, points: &Path, lens: &[u64], queries: u64, seed: u64, format: Format) -> CmdResult {
    let filter = load_filter(path)?;
    let pts = load_points_for(&filter, points)?;
    let p = *filter.params();
    let lens: Vec<u64> = if lens.is_empty() {
        let mut v = vec![1, (p.max_len() / 4).max(1), p.max_len()];
        v.dedup();
        v
    } else {
        lens.to_vec()
    };
    if let Some(&bad) = lens.iter().find(|&&l| l == 0 || l > p.max_len()) {
        return Err(Failure::new(EXIT_TOO_LONG, anyhow!("length {bad} is not in 1..={}", p.max_len())));
    }
    let bloom = BloomBaseline::build(&PointSet::new(pts, p.universe_bits())?, &p);
    let top = p.universe_size() - 1;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &len in &lens {
        let last_start = (top + 1 - len as u128) as u64;
        let intervals: Vec<Interval> = (0..queries)
            .map(|_| {
                let a = rng.gen_range(0..=last_start);
                Interval { a, b: a + (len - 1) }
            })
            .collect();
        rows.push(bench_one("filter", &filter, &intervals, |p| p.range_queries)?);
        rows.push(bench_one("bloom", &bloom, &intervals, |p| p.point_probes)?);
    }
    emit(&rows, format);
    Ok(ExitCode::SUCCESS)
}

fn cmd_lb_demo(n: usize, universe_bits: u32, len: u64, eps: &str, sets: u64, seed: u64) -> CmdResult {
    let eps = parse_epsilon(eps)?;
    for t in 0..sets {
        let trial = run_trial(n, universe_bits, len, eps, rangefilter::bits::mix_seed(seed, t))?;
        println!("{}", serde_json::to_string(&trial).expect("trials serialize"));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Build { input, universe_bits, max_len, epsilon, seed, out, format } => {
            cmd_build(&input, universe_bits, max_len, &epsilon, seed, &out, format)
        }
        Command::Query { filter, a, b } => cmd_query(&filter, a, b),
        Command::Fpr { filter, points, len, trials, seed, format } => {
            cmd_fpr(&filter, &points, len, trials, seed, format)
        }
        Command::Space { filter, format } => {
            emit(&load_filter(&filter)?.space_report(), format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { filter, points, lens, queries, seed, format } => {
            cmd_bench(&filter, &points, &lens, queries, seed, format)
        }
        Command::LbDemo { n, universe_bits, len, epsilon, sets, seed } => {
            cmd_lb_demo(n, universe_bits, len, &epsilon, sets, seed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
