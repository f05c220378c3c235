use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use scholz::checks::{self, Check, SweepConfig};
use scholz::records::{write_records, Format, Summary, Verdict};
use scholz::symbols::{self, Evaluated};
use scholz::{graph_text, UnitCache};
use scholz_core::f2graph::{Edge, EdgeVector, PrimeGraph};
use scholz_core::invariants::report;
use scholz_core::mquad::SquareConfig;

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_FAILURES: u8 = 3;
const EXIT_UNDECIDED: u8 = 4;

#[derive(Parser)]
#[command(name = "scholz", version, about = "Quartic symbols, unit residue symbols and invariant sums over prime graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a symbol and show how.
    Symbol {
        kind: SymbolKind,
        /// Numerator (for `unit`, the radicand m of ε_m).
        a: BigInt,
        /// Modulus.
        b: BigInt,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Run verification sweeps.
    Verify {
        /// Check to run; repeat for several. Defaults to all.
        #[arg(long = "check")]
        checks: Vec<String>,
        /// Overrides each check's own bound.
        #[arg(long)]
        bound: Option<u64>,
        /// Random graphs drawn by `duality`.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Precision ceiling in bits for the square test.
        #[arg(long, default_value_t = 4096)]
        precision: u32,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "human")]
        format: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the invariant sum of a set of edges such as `5-29 2-5`.
    Invariant {
        #[arg(required = true)]
        edges: Vec<String>,
    },
    /// Print the prime graph on the given primes.
    Graph {
        #[arg(required = true)]
        primes: Vec<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SymbolKind {
    Legendre,
    Jacobi,
    Quartic,
    Unit,
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<scholz::Error> for Failure {
    fn from(e: scholz::Error) -> Self {
        match e {
            scholz::Error::Core(e) => Failure::Domain(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<scholz_core::Error> for Failure {
    fn from(e: scholz_core::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}

fn small(n: &BigInt, what: &str) -> Result<u64, Failure> {
    u64::try_from(n).map_err(|_| Failure::Domain(format!("{what} must be a non-negative 64-bit integer, got {n}")))
}

fn open_cache(path: Option<PathBuf>) -> UnitCache {
    let cache = path.map_or_else(UnitCache::in_memory, UnitCache::open);
    report_warnings(&cache);
    cache
}

fn report_warnings(cache: &UnitCache) {
    for w in cache.take_warnings() {
        eprintln!("warning: {w}");
    }
}

fn close_cache(cache: &UnitCache) {
    report_warnings(cache);
    if let Err(e) = cache.compact() {
        eprintln!("warning: cache compaction failed: {e}");
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Symbol { kind, a, b, cache } => {
            let evaluated: Evaluated = match kind {
                SymbolKind::Legendre => symbols::legendre_symbol(&a, small(&b, "p")?)?,
                SymbolKind::Jacobi => symbols::jacobi_symbol(&a, &b)?,
                SymbolKind::Quartic => symbols::quartic_symbol(&a, small(&b, "p")?)?,
                SymbolKind::Unit => {
                    let units = open_cache(cache);
                    let e = symbols::unit_symbol(small(&a, "m")?, small(&b, "p")?, &units);
                    close_cache(&units);
                    e?
                }
            };
            println!("{}\n{}", evaluated.value, evaluated.definition);
            Ok(0)
        }
        Command::Verify { checks, bound, samples, cache, precision, jobs, format, seed } => {
            let format: Format = format.parse().map_err(Failure::Usage)?;
            let checks: Vec<Check> = if checks.is_empty() {
                Check::ALL.to_vec()
            } else {
                checks.iter().map(|c| c.parse()).collect::<Result<_, _>>().map_err(Failure::Usage)?
            };
            if bound.is_some_and(|b| b < 2) {
                return Err(Failure::Usage("--bound must be at least 2".into()));
            }
            if precision < 64 {
                return Err(Failure::Usage("--precision must be at least 64".into()));
            }
            let square = SquareConfig { precision_max: precision, ..SquareConfig::default() };
            let cfg = SweepConfig { bound, samples, square, jobs: jobs.max(1), seed, ..SweepConfig::default() };
            let units = open_cache(cache);
            let mut records = Vec::new();
            for &check in &checks {
                records.extend(checks::run(check, &cfg, &units));
            }
            close_cache(&units);
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write_records(&mut out, &records, format).map_err(|e| Failure::Usage(e.to_string()))?;
            for &check in &checks {
                let summary = Summary::of(check.name(), &records);
                if format == Format::Human {
                    let _ = writeln!(out, "{summary}");
                } else {
                    eprintln!("{summary}");
                }
            }
            let _ = out.flush();
            Ok(if records.iter().any(|r| r.verdict == Verdict::Fail) {
                EXIT_FAILURES
            } else if records.iter().any(|r| r.verdict == Verdict::Undecided) {
                EXIT_UNDECIDED
            } else {
                0
            })
        }
        Command::Invariant { edges } => {
            let mut query = EdgeVector::new();
            for e in &edges {
                query.toggle(parse_edge(e)?);
            }
            println!("{}", report(&query)?);
            Ok(0)
        }
        Command::Graph { primes } => {
            print!("{}", graph_text::write_graph(&PrimeGraph::build(&primes)?));
            Ok(0)
        }
    }
}

fn parse_edge(s: &str) -> Result<Edge, Failure> {
    let bad = || Failure::Usage(format!("edge must look like `5-29`, got {s:?}"));
    let (p, q) = s.split_once('-').ok_or_else(bad)?;
    let (p, q): (u64, u64) = (p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?);
    if p == q {
        return Err(bad());
    }
    Ok(Edge::new(p, q))
}
