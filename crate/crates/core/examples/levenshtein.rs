//! Edit distance through memoized equations and an assignment solver.

use std::sync::Arc;

use freechr::oracles::lev_dp;
use freechr::programs::{levenshtein_program, resolve, LevFact, LevenshteinGoal, SymbolGenerator};
use freechr::{MatchMode, SolverConfig};

fn encode(s: &str) -> Vec<i64> {
    s.chars().map(|c| c as i64).collect()
}

fn main() {
    for (a, b) in [("kitten", "sitting"), ("flaw", "lawn"), ("rule", "rules"), ("", "abc")] {
        // The symbol generator is per-run state.
        let program = levenshtein_program(Arc::new(SymbolGenerator::new()));
        let goal = LevenshteinGoal::new(encode(a), encode(b), "d");
        let cfg = SolverConfig::new(MatchMode::LazyIndexed);
        let outcome = program
            .run(freechr::State::new([LevFact::Ldist(goal)]), &cfg)
            .expect("distance terminates");
        let facts: Vec<LevFact> = outcome.state.store().map(|(_, f)| f.clone()).collect();
        println!(
            "lev({a:?}, {b:?}) = {:?} (dp: {}, {} facts, {} steps)",
            resolve(&facts, "d"),
            lev_dp(a.as_bytes(), b.as_bytes()),
            facts.len(),
            outcome.steps
        );
    }
}
