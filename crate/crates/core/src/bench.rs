//! Seeded problem generators and the benchmark runner.
//!
//! Instances are drawn from a ChaCha8 generator seeded with the bench seed, so
//! a seed fully determines an instance set. Each query runs with its own
//! program and state; the wall-clock limit is checked every
//! [`SolverConfig::TIME_CHECK_INTERVAL`] steps. Mean runtimes only cover
//! queries that finished within the limit.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{MatchMode, SolverConfig};
use crate::error::{EngineError, RunError};
use crate::oracles;
use crate::programs::lev::{levenshtein_program, LevFact, LevenshteinGoal, SymbolGenerator};
use crate::programs::shp::{shortest_path_program, Edge, GraphFact};
use crate::programs::gcd_program;
use crate::state::Constraint;

pub const LEV_LENGTH: usize = 15;
pub const LEV_ALPHABET: i64 = 8;
pub const SHP_MAX_WEIGHT: i64 = 100;
pub const LEV_RESULT_VAR: &str = "result";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Problem {
    Gcd,
    Shp,
    Lev,
}

impl Problem {
    pub const ALL: [Problem; 3] = [Problem::Gcd, Problem::Shp, Problem::Lev];
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Gcd => "GCD",
            Problem::Shp => "SHP",
            Problem::Lev => "LEV",
        })
    }
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gcd" => Ok(Problem::Gcd),
            "shp" => Ok(Problem::Shp),
            "lev" => Ok(Problem::Lev),
            other => Err(format!("unknown problem `{other}` (expected gcd, shp or lev)")),
        }
    }
}

/// `[x, 1000 * n]` with `x` uniform in `2..=1000`.
pub fn gen_gcd(n: u64, rng: &mut impl Rng) -> Vec<i64> {
    vec![rng.gen_range(2..=1000), 1000 * n as i64]
}

pub fn shp_node_count(n: u64) -> usize {
    let mut root = (n as f64).sqrt() as u64;
    while root * root < n {
        root += 1;
    }
    while root > 0 && (root - 1) * (root - 1) >= n {
        root -= 1;
    }
    2 * root as usize
}

/// `n` edges between `2 * ceil(sqrt(n))` nodes named `n0, n1, ...`. Endpoints
/// are uniform without self-loops (parallel edges may occur); weights are
/// uniform in `1..=100`.
pub fn gen_shp(n: u64, rng: &mut impl Rng) -> Vec<Edge> {
    let nodes = shp_node_count(n);
    (0..n)
        .map(|_| {
            let s = rng.gen_range(0..nodes);
            let mut t = rng.gen_range(0..nodes - 1);
            if t >= s {
                t += 1;
            }
            Edge::new(&format!("n{s}"), &format!("n{t}"), rng.gen_range(1..=SHP_MAX_WEIGHT))
        })
        .collect()
}

pub fn lev_max_mutations(n: u64) -> usize {
    (LEV_LENGTH * n as usize).div_ceil(100)
}

/// A random length-15 sequence and a copy with up to `ceil(15 n / 100)`
/// mutations. Every mutation keeps the length: a substitution, an insertion
/// followed by truncation, or a deletion followed by padding.
pub fn gen_lev(n: u64, rng: &mut impl Rng) -> LevenshteinGoal {
    let base: Vec<i64> = (0..LEV_LENGTH).map(|_| rng.gen_range(0..LEV_ALPHABET)).collect();
    let mut other = base.clone();
    let k = rng.gen_range(0..=lev_max_mutations(n));
    for _ in 0..k {
        match rng.gen_range(0..3) {
            0 => {
                let pos = rng.gen_range(0..LEV_LENGTH);
                let mut sym = rng.gen_range(0..LEV_ALPHABET - 1);
                if sym >= other[pos] {
                    sym += 1;
                }
                other[pos] = sym;
            }
            1 => {
                let pos = rng.gen_range(0..=LEV_LENGTH);
                other.insert(pos, rng.gen_range(0..LEV_ALPHABET));
                other.truncate(LEV_LENGTH);
            }
            _ => {
                let pos = rng.gen_range(0..LEV_LENGTH);
                other.remove(pos);
                other.push(rng.gen_range(0..LEV_ALPHABET));
            }
        }
    }
    LevenshteinGoal::new(base, other, LEV_RESULT_VAR)
}

/// One generated query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instance {
    Gcd(Vec<i64>),
    Shp(Vec<Edge>),
    Lev(LevenshteinGoal),
}

/// Final store of a completed run, in id order.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalStore {
    Gcd(Vec<i64>),
    Shp(Vec<GraphFact>),
    Lev(Vec<LevFact>),
}

impl FinalStore {
    /// Values rendered one per line, in id order.
    pub fn lines(&self) -> Vec<String> {
        match self {
            FinalStore::Gcd(v) => v.iter().map(|x| x.to_string()).collect(),
            FinalStore::Shp(v) => v.iter().map(|x| x.to_string()).collect(),
            FinalStore::Lev(v) => v.iter().map(|x| x.to_string()).collect(),
        }
    }

    /// Sorted rendering, independent of id assignment.
    pub fn multiset(&self) -> Vec<String> {
        let mut out = match self {
            FinalStore::Gcd(v) => v.iter().map(|x| format!("{x:?}")).collect(),
            FinalStore::Shp(v) => v.iter().map(|x| format!("{x:?}")).collect(),
            FinalStore::Lev(v) => v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>(),
        };
        out.sort();
        out
    }

    pub fn len(&self) -> usize {
        match self {
            FinalStore::Gcd(v) => v.len(),
            FinalStore::Shp(v) => v.len(),
            FinalStore::Lev(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct InstanceRun {
    pub mode: MatchMode,
    pub steps: u64,
    pub elapsed: Duration,
    /// `None` if a limit was hit.
    pub store: Option<FinalStore>,
}

impl InstanceRun {
    pub fn completed(&self) -> bool {
        self.store.is_some()
    }
}

fn finish<V: Constraint + Clone>(
    result: Result<crate::RunOutcome<V>, RunError<V>>,
    mode: MatchMode,
    start: Instant,
    wrap: fn(Vec<V>) -> FinalStore,
) -> Result<InstanceRun, EngineError> {
    match result {
        Ok(outcome) => Ok(InstanceRun {
            mode,
            steps: outcome.steps,
            elapsed: start.elapsed(),
            store: Some(wrap(
                outcome
                    .state
                    .into_store_values()
                    .into_iter()
                    .map(|v| Arc::unwrap_or_clone(v))
                    .collect(),
            )),
        }),
        Err(RunError::LimitExceeded { steps, .. }) => Ok(InstanceRun {
            mode,
            steps,
            elapsed: start.elapsed(),
            store: None,
        }),
        Err(RunError::Engine(e)) => Err(e),
    }
}

impl Instance {
    pub fn generate(problem: Problem, n: u64, rng: &mut impl Rng) -> Self {
        match problem {
            Problem::Gcd => Instance::Gcd(gen_gcd(n, rng)),
            Problem::Shp => Instance::Shp(gen_shp(n, rng)),
            Problem::Lev => Instance::Lev(gen_lev(n, rng)),
        }
    }

    pub fn problem(&self) -> Problem {
        match self {
            Instance::Gcd(_) => Problem::Gcd,
            Instance::Shp(_) => Problem::Shp,
            Instance::Lev(_) => Problem::Lev,
        }
    }

    /// Runs the query with a fresh program and the default step limit.
    pub fn run(&self, mode: MatchMode, time_limit: Option<Duration>) -> Result<InstanceRun, EngineError> {
        let cfg = SolverConfig::new(mode).with_time_limit(time_limit);
        self.run_with(&cfg)
    }

    pub fn run_with(&self, cfg: &SolverConfig) -> Result<InstanceRun, EngineError> {
        let start = Instant::now();
        match self {
            Instance::Gcd(q) => {
                let result = gcd_program().run(crate::State::new(q.iter().copied()), cfg);
                finish(result, cfg.mode, start, FinalStore::Gcd)
            }
            Instance::Shp(edges) => {
                let query = edges.iter().cloned().map(GraphFact::Edge);
                let result = shortest_path_program().run(crate::State::new(query), cfg);
                finish(result, cfg.mode, start, FinalStore::Shp)
            }
            Instance::Lev(goal) => {
                let program = levenshtein_program(Arc::new(SymbolGenerator::new()));
                let result = program.run(crate::State::new([LevFact::Ldist(goal.clone())]), cfg);
                finish(result, cfg.mode, start, FinalStore::Lev)
            }
        }
    }

    /// Checks a final store against the matching oracle.
    pub fn verify(&self, store: &FinalStore) -> Result<(), String> {
        match (self, store) {
            (Instance::Gcd(q), FinalStore::Gcd(s)) => oracles::verify_gcd(q, s),
            (Instance::Shp(e), FinalStore::Shp(s)) => oracles::verify_shp(e, s),
            (Instance::Lev(g), FinalStore::Lev(s)) => {
                oracles::verify_lev(&g.seq_a, &g.seq_b, &g.result_var, s)
            }
            _ => Err("store does not belong to this problem".into()),
        }
    }
}

/// `queries` instances of the given problem and size, fully determined by
/// `seed`.
pub fn instance_set(problem: Problem, size: u64, queries: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..queries)
        .map(|_| Instance::generate(problem, size, &mut rng))
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub problem: Problem,
    pub size: u64,
    pub mode: MatchMode,
    pub queries: usize,
    pub time_limit: Duration,
    pub seed: u64,
    /// Spread queries over worker threads.
    pub parallel: bool,
}

impl BenchSpec {
    pub fn new(problem: Problem, size: u64, mode: MatchMode) -> Self {
        BenchSpec {
            problem,
            size,
            mode,
            queries: 100,
            time_limit: Duration::from_secs(1),
            seed: 0,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub problem: Problem,
    pub size: u64,
    pub mode: MatchMode,
    /// Mean over completed queries; `None` when none completed.
    pub mean_runtime_ms: Option<f64>,
    pub completion_rate: f64,
    /// Per query; `None` for queries that hit the limit.
    pub timings_ms: Vec<Option<f64>>,
    pub parallel: bool,
}

impl BenchResult {
    fn from_timings(spec: &BenchSpec, timings_ms: Vec<Option<f64>>) -> Self {
        let done: Vec<f64> = timings_ms.iter().flatten().copied().collect();
        let mean_runtime_ms = (!done.is_empty()).then(|| done.iter().sum::<f64>() / done.len() as f64);
        let completion_rate = if timings_ms.is_empty() {
            0.0
        } else {
            done.len() as f64 / timings_ms.len() as f64
        };
        BenchResult {
            problem: spec.problem,
            size: spec.size,
            mode: spec.mode,
            mean_runtime_ms,
            completion_rate,
            timings_ms,
            parallel: spec.parallel,
        }
    }
}

fn time_query(instance: &Instance, spec: &BenchSpec) -> Result<Option<f64>, EngineError> {
    let run = instance.run(spec.mode, Some(spec.time_limit))?;
    let ms = run.elapsed.as_secs_f64() * 1000.0;
    Ok((run.completed() && run.elapsed <= spec.time_limit).then_some(ms))
}

pub fn run_bench(spec: &BenchSpec) -> Result<BenchResult, EngineError> {
    let instances = instance_set(spec.problem, spec.size, spec.queries, spec.seed);
    let timings = if spec.parallel {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let chunk = instances.len().div_ceil(workers).max(1);
        std::thread::scope(|scope| {
            let handles: Vec<_> = instances
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|i| time_query(i, spec))
                            .collect::<Result<Vec<_>, _>>()
                    })
                })
                .collect();
            let mut all = Vec::with_capacity(instances.len());
            for h in handles {
                all.extend(h.join().expect("bench worker panicked")?);
            }
            Ok::<_, EngineError>(all)
        })?
    } else {
        instances
            .iter()
            .map(|i| time_query(i, spec))
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(BenchResult::from_timings(spec, timings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(format!("unknown format `{other}` (expected csv or markdown)")),
        }
    }
}

pub const CSV_HEADER: [&str; 5] = ["problem", "size", "config", "mean_ms", "completion_rate"];

/// One parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub problem: Problem,
    pub size: u64,
    pub mode: MatchMode,
    pub mean_ms: Option<f64>,
    pub completion_rate: f64,
}

fn fmt_ms(ms: Option<f64>) -> String {
    ms.map_or_else(|| "–".to_owned(), |m| format!("{m:.2}"))
}

pub fn emit_table(results: &[BenchResult], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => emit_csv(results),
        TableFormat::Markdown => emit_markdown(results),
    }
}

fn emit_csv(results: &[BenchResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in results {
        w.write_record([
            r.problem.to_string(),
            r.size.to_string(),
            r.mode.to_string(),
            r.mean_runtime_ms.map(|m| m.to_string()).unwrap_or_default(),
            r.completion_rate.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

/// One row per problem and size, a time and completion column per config.
fn emit_markdown(results: &[BenchResult]) -> String {
    let mut modes: Vec<MatchMode> = results.iter().map(|r| r.mode).collect();
    modes.sort();
    modes.dedup();
    let mut rows: Vec<(Problem, u64)> = results.iter().map(|r| (r.problem, r.size)).collect();
    rows.sort();
    rows.dedup();

    let mut out = String::from("| Prob. | Size |");
    for m in &modes {
        out.push_str(&format!(" t_{m} (ms) | c_{m} |"));
    }
    out.push_str("\n|---|---:|");
    for _ in &modes {
        out.push_str("---:|---:|");
    }
    out.push('\n');
    for (problem, size) in rows {
        out.push_str(&format!("| {problem} | {size} |"));
        for m in &modes {
            match results
                .iter()
                .find(|r| r.problem == problem && r.size == size && r.mode == *m)
            {
                Some(r) => out.push_str(&format!(
                    " {} | {:.2} |",
                    fmt_ms(r.mean_runtime_ms),
                    r.completion_rate
                )),
                None => out.push_str("  |  |"),
            }
        }
        out.push('\n');
    }
    if results.iter().any(|r| r.parallel) {
        out.push_str("\nTimings measured with parallel workers.\n");
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let field = |i: usize| record.get(i).ok_or_else(|| format!("missing column {i}"));
        let mean = field(3)?;
        rows.push(CsvRow {
            problem: field(0)?.parse()?,
            size: field(1)?.parse().map_err(|e| format!("size: {e}"))?,
            mode: field(2)?.parse()?,
            mean_ms: if mean.is_empty() {
                None
            } else {
                Some(mean.parse().map_err(|e| format!("mean_ms: {e}"))?)
            },
            completion_rate: field(4)?.parse().map_err(|e| format!("completion_rate: {e}"))?,
        });
    }
    Ok(rows)
}
