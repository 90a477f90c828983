//! `lrl`: exact computations on integer distance sets in cyclic groups.
//! Every command validates its input, runs an exhaustive or randomized
//! computation from the core library, and prints one report to stdout.
//! Exit codes: 0 success, 1 a verification or reproduction check failed,
//! 2 malformed invocation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lrl_core::chromatic::{chi_r_at, max_min_distance, verify_family, ChiR};
use lrl_core::lemmas::{full_suite, LemmaReport};
use lrl_core::modular::{decompose_levels, DistanceSet};
use lrl_core::prime_filter::{corollary_multiplier, filter_multiplier, ForbiddenFamily, MultiplierChain};
use lrl_core::seven_search::{
    burnside_orbit_count, canonical_pair_98, enumerate_orbits_49, exceptional_49,
    known_exceptional_49, known_exceptional_pairs_98, read_orbit_cache, seven_report,
    write_orbit_cache, OrbitRecord, SevenReport, Verdict,
};
use lrl_core::Error;

#[derive(Parser)]
#[command(
    name = "lrl",
    version,
    about = "Multiplier searches, chromatic bounds, and exhaustive arc-lemma scans for integer distance sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format; csv is available for the orbit table only
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all hardware threads)
    #[arg(long, global = true, env = "LRL_THREADS")]
    threads: Option<usize>,
    /// Orbit cache file, reused across runs when valid
    #[arg(long, global = true, env = "LRL_CACHE")]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Best multiplier and chromatic value for a set at one modulus
    Chi {
        /// Comma-separated positive distances
        #[arg(long)]
        set: String,
        #[arg(long)]
        modulus: u64,
    },
    /// Certify chi_r(D) <= |D|+1 for every gcd-1 set of a given size
    Verify {
        /// Set size, 1 through 6
        #[arg(long)]
        k: usize,
        /// Largest allowed element
        #[arg(long)]
        max_d: u64,
        /// Modulus search ceiling
        #[arg(long, default_value_t = 5000)]
        n_max: u64,
    },
    /// Enumerate dilation orbits of five unit classes mod 49 and search each
    Search49,
    /// Lift the exceptional sets to Z_98 and audit the surviving cases
    Lift98,
    /// Run every exhaustive lemma scan
    Lemmas,
    /// Find a multiplier chain avoiding forbidden arcs per element
    Filter {
        /// Odd prime p; the modulus is p^(m+1) for the largest valuation m
        #[arg(long)]
        prime: u64,
        /// Comma-separated positive distances
        #[arg(long)]
        set: String,
        /// Forbidden arcs per element, e.g. "1=0,6;7=0"
        #[arg(long, conflicts_with = "level")]
        forbid: Option<String>,
        /// Corollary mode: clear the extreme arcs below this cutoff level
        #[arg(long)]
        level: Option<u32>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

enum Failure {
    /// Malformed invocation: exit 2.
    Usage(String),
    /// Input was valid but a verification or reproduction check failed:
    /// exit 1. The report has already been printed.
    Check(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

type Run = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        // A second build_global in the same process is harmless to ignore.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Run {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Search49) {
        return Err(Failure::Usage(
            "csv format is available only for search49".into(),
        ));
    }
    match &cli.command {
        Command::Chi { set, modulus } => cmd_chi(set, *modulus, cli.format),
        Command::Verify { k, max_d, n_max } => cmd_verify(*k, *max_d, *n_max, cli.format),
        Command::Search49 => cmd_search49(cli.format, cli.cache.as_deref()),
        Command::Lift98 => cmd_lift98(cli.format, cli.cache.as_deref()),
        Command::Lemmas => cmd_lemmas(cli.format),
        Command::Filter {
            prime,
            set,
            forbid,
            level,
        } => cmd_filter(*prime, set, forbid.as_deref(), *level, cli.format),
    }
}

fn parse_set(text: &str) -> Result<DistanceSet, Failure> {
    let values: Vec<u64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("bad set element '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    DistanceSet::new(values).map_err(usage)
}

/// Writes a finished report to stdout. A consumer closing the pipe early
/// (head, grep -q) is not an error; any other write failure is.
fn deliver(text: &str) {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            panic!("cannot write report: {e}");
        }
    }
}

fn emit<T: Serialize>(report: &T) {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    deliver(&text);
}

#[derive(Serialize)]
struct ChiReport {
    modulus: u64,
    set: Vec<u64>,
    chi: ChiR,
    lambda: u64,
    min_distance: u64,
    distances: Vec<u64>,
}

fn cmd_chi(set: &str, modulus: u64, format: Format) -> Run {
    let d = parse_set(set)?;
    let witness = max_min_distance(&d, modulus).map_err(usage)?;
    let chi = chi_r_at(&d, modulus).map_err(usage)?;
    let report = ChiReport {
        modulus,
        set: d.elements().to_vec(),
        chi,
        lambda: witness.lambda,
        min_distance: witness.min_distance,
        distances: witness.distances,
    };
    match format {
        Format::Json => emit(&report),
        _ => {
            let mut out = String::new();
            let set: Vec<String> = report.set.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "chi_r({}, {{{}}}) = {}", modulus, set.join(","), report.chi);
            let _ = writeln!(out, "lambda = {}", report.lambda);
            let _ = writeln!(out, "min distance = {}", report.min_distance);
            let dist: Vec<String> = report.distances.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "distances = {}", dist.join(","));
            deliver(&out);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyRow {
    set: Vec<u64>,
    modulus: u64,
    lambda: u64,
    min_distance: u64,
}

#[derive(Serialize)]
struct VerifyReport {
    k: usize,
    max_d: u64,
    n_max: u64,
    total: u64,
    certified: u64,
    witnesses: Vec<VerifyRow>,
    failures: Vec<Vec<u64>>,
}

fn cmd_verify(k: usize, max_d: u64, n_max: u64, format: Format) -> Run {
    if !(1..=6).contains(&k) {
        return Err(Failure::Usage(format!("--k must be 1..=6, got {k}")));
    }
    let results = verify_family(k, max_d, n_max);
    let mut witnesses = Vec::new();
    let mut failures = Vec::new();
    for (set, witness) in results {
        match witness {
            Some(w) => witnesses.push(VerifyRow {
                set,
                modulus: w.modulus,
                lambda: w.lambda,
                min_distance: w.min_distance,
            }),
            None => failures.push(set),
        }
    }
    let report = VerifyReport {
        k,
        max_d,
        n_max,
        total: (witnesses.len() + failures.len()) as u64,
        certified: witnesses.len() as u64,
        witnesses,
        failures,
    };
    match format {
        Format::Json => emit(&report),
        _ => {
            let mut out = String::new();
            for row in &report.witnesses {
                let set: Vec<String> = row.set.iter().map(u64::to_string).collect();
                let _ = writeln!(
                    out,
                    "D={{{}}} N={} lambda={} min={}",
                    set.join(","),
                    row.modulus,
                    row.lambda,
                    row.min_distance
                );
            }
            for set in &report.failures {
                let set: Vec<String> = set.iter().map(u64::to_string).collect();
                let _ = writeln!(out, "D={{{}}} UNCERTIFIED up to n_max={}", set.join(","), n_max);
            }
            let _ = writeln!(out, "certified {}/{}", report.certified, report.total);
            deliver(&out);
        }
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} sets not certified",
            report.failures.len()
        )))
    }
}

/// Loads the orbit table from the cache when it is present and sane,
/// recomputing and rewriting it otherwise.
fn orbits_with_cache(cache: Option<&Path>) -> Vec<OrbitRecord> {
    let Some(path) = cache else {
        return enumerate_orbits_49();
    };
    if path.exists() {
        match read_orbit_cache(path) {
            Ok(records) if records.len() as u64 == burnside_orbit_count() => return records,
            Ok(records) => eprintln!(
                "cache {}: wrong record count {}, regenerating",
                path.display(),
                records.len()
            ),
            Err(e) => eprintln!("cache {}: {e}, regenerating", path.display()),
        }
    }
    let records = enumerate_orbits_49();
    match write_orbit_cache(path, &records) {
        Ok(()) => eprintln!("cache written to {}", path.display()),
        Err(e) => eprintln!("cache {} not written: {e}", path.display()),
    }
    records
}

#[derive(Serialize)]
struct OrbitRow {
    classes: Vec<u64>,
    verdict: Verdict,
    lambda: Option<u64>,
}

#[derive(Serialize)]
struct OrbitReport {
    orbit_count: u64,
    matches_known: bool,
    exceptional: Vec<Vec<u64>>,
    orbits: Vec<OrbitRow>,
}

fn cmd_search49(format: Format, cache: Option<&Path>) -> Run {
    let records = orbits_with_cache(cache);
    let exceptional = exceptional_49(&records);
    let matches_known = records.len() as u64 == burnside_orbit_count()
        && exceptional == known_exceptional_49();
    let report = OrbitReport {
        orbit_count: records.len() as u64,
        matches_known,
        exceptional: exceptional.iter().map(|s| s.classes().to_vec()).collect(),
        orbits: records
            .iter()
            .map(|r| OrbitRow {
                classes: r.canonical.classes().to_vec(),
                verdict: r.verdict,
                lambda: r.witness,
            })
            .collect(),
    };
    match format {
        Format::Json => emit(&report),
        Format::Csv => {
            let mut out = String::from("c1,c2,c3,c4,c5,verdict,lambda\n");
            for row in &report.orbits {
                let classes: Vec<String> = row.classes.iter().map(u64::to_string).collect();
                let verdict = match row.verdict {
                    Verdict::Covered => "covered",
                    Verdict::Exceptional => "exceptional",
                };
                let lambda = row.lambda.map(|l| l.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{verdict},{lambda}", classes.join(","));
            }
            deliver(&out);
        }
        Format::Plain => {
            let mut out = String::new();
            let _ = writeln!(out, "orbits: {}", report.orbit_count);
            for classes in &report.exceptional {
                let c: Vec<String> = classes.iter().map(u64::to_string).collect();
                let _ = writeln!(out, "exceptional: {{{}}}", c.join(","));
            }
            let _ = writeln!(out, "matches known lists: {}", report.matches_known);
            deliver(&out);
        }
    }
    if matches_known {
        Ok(())
    } else {
        Err(Failure::Check("orbit table differs from the known lists".into()))
    }
}

#[derive(Serialize)]
struct Lift98Report {
    #[serde(flatten)]
    seven: SevenReport,
    matches_known: bool,
    all_gcd_pass: bool,
}

fn cmd_lift98(format: Format, cache: Option<&Path>) -> Run {
    let records = orbits_with_cache(cache);
    let seven = seven_report(&records).expect("orbit records carry unit classes");
    let pairs: BTreeSet<(Vec<u64>, u64)> = seven
        .exceptional_98
        .iter()
        .map(|s| canonical_pair_98(&s.lift, s.d6))
        .collect();
    let matches_known = pairs == known_exceptional_pairs_98();
    let all_gcd_pass = seven.gcd_audit.iter().all(|c| c.pass);
    let report = Lift98Report {
        seven,
        matches_known,
        all_gcd_pass,
    };
    match format {
        Format::Json => emit(&report),
        _ => {
            let mut out = String::new();
            let _ = writeln!(out, "orbits: {}", report.seven.orbit_count);
            for s in &report.seven.exceptional_98 {
                let lift: Vec<String> = s.lift.iter().map(u64::to_string).collect();
                let _ = writeln!(out, "exceptional: {{{}}} d6={}", lift.join(","), s.d6);
            }
            for check in &report.seven.gcd_audit {
                let case: Vec<String> = check.case.iter().map(u64::to_string).collect();
                let _ = writeln!(
                    out,
                    "gcd {{{}}} = {} -> {}",
                    case.join(","),
                    check.gcd,
                    if check.pass { "pass" } else { "fail" }
                );
            }
            let _ = writeln!(out, "matches known lists: {}", report.matches_known);
            deliver(&out);
        }
    }
    if matches_known && all_gcd_pass {
        Ok(())
    } else {
        Err(Failure::Check(
            "lifted combinations differ from the known lists".into(),
        ))
    }
}

fn cmd_lemmas(format: Format) -> Run {
    let reports: Vec<LemmaReport> = full_suite().expect("standard parameters are valid");
    match format {
        Format::Json => emit(&reports),
        _ => {
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(
                    out,
                    "{}: domain={} failures={} expected={}",
                    r.id,
                    r.domain_size,
                    r.failures.len(),
                    if r.exception_match { "yes" } else { "NO" }
                );
            }
            deliver(&out);
        }
    }
    if reports.iter().all(|r| r.exception_match) {
        Ok(())
    } else {
        Err(Failure::Check("a lemma scan left unexpected failures".into()))
    }
}

fn parse_forbid(text: &str, elements: &[u64]) -> Result<BTreeMap<u64, BTreeSet<u64>>, Failure> {
    let mut map: BTreeMap<u64, BTreeSet<u64>> =
        elements.iter().map(|&d| (d, BTreeSet::new())).collect();
    let mut seen = BTreeSet::new();
    for part in text.split(';') {
        let (elem, arcs) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("bad forbid entry '{part}', expected d=a1,a2")))?;
        let d: u64 = elem
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad forbid element '{elem}'")))?;
        if !map.contains_key(&d) {
            return Err(Failure::Usage(format!("forbid element {d} is not in --set")));
        }
        if !seen.insert(d) {
            return Err(Failure::Usage(format!("forbid element {d} listed twice")));
        }
        let arcs: BTreeSet<u64> = arcs
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<u64>()
                    .map_err(|_| usage(format!("bad arc '{a}' for element {d}")))
            })
            .collect::<Result<_, _>>()?;
        map.insert(d, arcs);
    }
    Ok(map)
}

#[derive(Serialize)]
struct FilterOk {
    prime: u64,
    set: Vec<u64>,
    chain: MultiplierChain,
}

#[derive(Serialize)]
struct FilterViolation {
    prime: u64,
    set: Vec<u64>,
    error: String,
    violations: Vec<LevelRow>,
}

#[derive(Serialize)]
struct LevelRow {
    level: u32,
    sum: u64,
    bound: u64,
}

fn cmd_filter(
    prime: u64,
    set: &str,
    forbid: Option<&str>,
    level: Option<u32>,
    format: Format,
) -> Run {
    let d = parse_set(set)?;
    let dec = decompose_levels(&d, prime).map_err(usage)?;
    let outcome = match (forbid, level) {
        (Some(text), None) => {
            let map = parse_forbid(text, d.elements())?;
            let family = ForbiddenFamily::new(&dec, map).map_err(usage)?;
            filter_multiplier(&dec, &family)
        }
        (None, Some(i0)) => corollary_multiplier(&dec, i0),
        _ => {
            return Err(Failure::Usage(
                "exactly one of --forbid or --level is required".into(),
            ))
        }
    };
    match outcome {
        Ok(chain) => {
            let report = FilterOk {
                prime,
                set: d.elements().to_vec(),
                chain,
            };
            match format {
                Format::Json => emit(&report),
                _ => {
                    let mut out = String::new();
                    let _ = writeln!(out, "modulus = {}", report.chain.modulus);
                    for f in &report.chain.factors {
                        let _ = writeln!(out, "level {}: multiplier {}", f.level, f.multiplier);
                    }
                    let _ = writeln!(out, "product = {}", report.chain.product);
                    deliver(&out);
                }
            }
            Ok(())
        }
        Err(e) if is_precondition(&e) => {
            let violations = match &e {
                Error::CountingViolated(rows) => rows
                    .iter()
                    .map(|&(level, sum, bound)| LevelRow { level, sum, bound })
                    .collect(),
                _ => Vec::new(),
            };
            let report = FilterViolation {
                prime,
                set: d.elements().to_vec(),
                error: e.to_string(),
                violations,
            };
            match format {
                Format::Json => emit(&report),
                _ => deliver(&format!("precondition violated: {}\n", report.error)),
            }
            Err(Failure::Check(e.to_string()))
        }
        Err(e) => Err(usage(e)),
    }
}

fn is_precondition(e: &Error) -> bool {
    matches!(
        e,
        Error::CountingViolated(_)
            | Error::ResidueTooSmall { .. }
            | Error::LevelTooLarge { .. }
            | Error::BadCutoff { .. }
    )
}
