//! A small benchmark sweep rendered as a markdown table and as CSV.

use std::time::Duration;

use freechr::bench::{emit_table, run_bench, BenchSpec, Problem, TableFormat};
use freechr::MatchMode;

fn main() {
    let mut results = Vec::new();
    for (problem, size) in [(Problem::Gcd, 100), (Problem::Shp, 10), (Problem::Shp, 20), (Problem::Lev, 10)] {
        for mode in MatchMode::ALL {
            let spec = BenchSpec {
                queries: 10,
                time_limit: Duration::from_secs(1),
                seed: 7,
                ..BenchSpec::new(problem, size, mode)
            };
            results.push(run_bench(&spec).expect("bench runs"));
        }
    }
    println!("{}", emit_table(&results, TableFormat::Markdown));
    print!("{}", emit_table(&results, TableFormat::Csv));
}
