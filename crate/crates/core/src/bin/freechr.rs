use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};

use freechr::bench::{emit_table, run_bench, BenchSpec, Problem, TableFormat};
use freechr::programs::{
    gcd_program, levenshtein_program, shortest_path_program, Edge, GraphFact, LevFact,
    LevenshteinGoal, SymbolGenerator,
};
use freechr::{Constraint, MatchMode, Program, SolverConfig, State};

#[derive(Parser)]
#[command(name = "freechr", version, about = "Run benchmark sets or single queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time a seeded query set and print a results table.
    Bench {
        #[arg(long)]
        problem: Problem,
        #[arg(long)]
        size: u64,
        #[arg(long, default_value = "indexed")]
        config: MatchMode,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 1000)]
        time_limit_ms: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "csv")]
        format: TableFormat,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Spread queries over worker threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Run one query and print the final store in id order.
    ///
    /// gcd: integers, e.g. "6 9 12". shp: edges, e.g. "a->b:1, b->c:2".
    /// lev: two words, e.g. "kitten sitting"; a word containing commas is read
    /// as an integer list.
    Demo {
        #[arg(long)]
        program: Problem,
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "indexed")]
        config: MatchMode,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench {
            problem,
            size,
            config,
            queries,
            time_limit_ms,
            seed,
            format,
            out,
            parallel,
        } => bench(
            BenchSpec {
                problem,
                size,
                mode: config,
                queries,
                time_limit: Duration::from_millis(time_limit_ms),
                seed,
                parallel,
            },
            format,
            out,
        ),
        Command::Demo {
            program,
            query,
            config,
        } => demo(program, &query, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn bench(spec: BenchSpec, format: TableFormat, out: Option<PathBuf>) -> Result<(), String> {
    if spec.queries == 0 || spec.size == 0 {
        return Err("--queries and --size must be at least 1".into());
    }
    let result = run_bench(&spec).map_err(|e| e.to_string())?;
    let table = emit_table(&[result], format);
    match out {
        Some(path) => std::fs::write(&path, table).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn demo(problem: Problem, query: &str, mode: MatchMode) -> Result<(), String> {
    match problem {
        Problem::Gcd => run_and_print(gcd_program(), parse_ints(query)?, mode),
        Problem::Shp => {
            let edges = parse_edges(query)?;
            run_and_print(shortest_path_program(), edges.into_iter().map(GraphFact::Edge).collect(), mode)
        }
        Problem::Lev => {
            let words: Vec<&str> = query.split_whitespace().collect();
            let [a, b] = words[..] else {
                return Err(format!("expected two sequences, got {}", words.len()));
            };
            let goal = LevenshteinGoal::new(parse_seq(a)?, parse_seq(b)?, "result");
            let program = levenshtein_program(Arc::new(SymbolGenerator::new()));
            run_and_print(program, vec![LevFact::Ldist(goal)], mode)
        }
    }
}

fn run_and_print<V: Constraint + Display>(program: Program<V>, query: Vec<V>, mode: MatchMode) -> Result<(), String> {
    let outcome = program
        .run(State::new(query), &SolverConfig::new(mode))
        .map_err(|e| e.to_string())?;
    for (id, value) in outcome.state.store() {
        println!("{id}: {value}");
    }
    eprintln!("{} steps, {:?}", outcome.steps, outcome.elapsed);
    Ok(())
}

fn parse_ints(text: &str) -> Result<Vec<i64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn parse_edges(text: &str) -> Result<Vec<Edge>, String> {
    text.split([',', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || format!("`{item}`: expected source->target:weight");
            let (ends, weight) = item.rsplit_once(':').ok_or_else(bad)?;
            let (source, target) = ends.split_once("->").ok_or_else(bad)?;
            let weight = weight.trim().parse().map_err(|_| bad())?;
            Ok(Edge::new(source.trim(), target.trim(), weight))
        })
        .collect()
}

fn parse_seq(word: &str) -> Result<Vec<i64>, String> {
    if word.contains(',') {
        parse_ints(word)
    } else {
        Ok(word.chars().map(|c| c as i64).collect())
    }
}
