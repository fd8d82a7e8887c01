//! Greatest common divisor by repeated subtraction, with a step trace.

use freechr::programs::gcd_program;
use freechr::{MatchMode, SolverConfig, State, StepEvent};

fn main() {
    let program = gcd_program();
    println!("rules: {:?}", program.rule_names());

    let cfg = SolverConfig::new(MatchMode::LazyIndexed).with_trace(|step, event| {
        if let StepEvent::Apply { rule, fired: true } = event {
            println!("step {step:>3}: fired rule {rule}");
        }
    });
    let outcome = program.run(State::new([6, 9, 12]), &cfg).expect("gcd terminates");
    let store: Vec<i64> = outcome.state.store().map(|(_, v)| *v).collect();
    println!("gcd(6, 9, 12) -> {store:?} in {} steps", outcome.steps);

    for query in [vec![1071, 462], vec![17, 5], vec![0, 8]] {
        let store = program
            .run_query(query.clone(), &SolverConfig::default())
            .expect("gcd terminates");
        println!("{query:?} -> {:?}", store.iter().map(|v| **v).collect::<Vec<_>>());
    }
}
