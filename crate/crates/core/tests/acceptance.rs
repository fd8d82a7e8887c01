//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fail.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use freechr::bench::{instance_set, run_bench, BenchSpec, FinalStore, Problem};
use freechr::oracles::naive_all_matchings;
use freechr::programs::{gcd_program, primitive_paths, GraphFact};
use freechr::{match_head, Constraint, Guard, Id, MatchMode, Pattern, SolverConfig, State, StepEvent};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Store holds all but the last value; the last is active.
fn state_with<V: Constraint>(values: Vec<V>) -> (State<V>, Id) {
    let n = values.len();
    let mut state = State::new(values);
    let mut id = Id(0);
    for i in 0..n {
        id = state.activate().unwrap();
        if i + 1 < n {
            state.pop_query().unwrap();
        }
    }
    (state, id)
}

fn matcher_vs_naive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let preds: [fn(&i64) -> bool; 5] = [|_| true, |x| x % 2 == 0, |x| x % 2 != 0, |x| *x > 3, |x| *x < 7];
    let guards: [fn(&[&i64]) -> bool; 4] = [
        |_| true,
        |v| v[0] <= v[v.len() - 1],
        |v| v.iter().copied().sum::<i64>() % 2 == 0,
        |v| v.windows(2).all(|w| w[0] != w[1]),
    ];
    let mut total = 0;
    for case in 0..200 {
        let stored = rng.gen_range(0..=6);
        let values: Vec<i64> = (0..=stored).map(|_| rng.gen_range(0..10)).collect();
        let (mut state, active) = state_with(values.clone());
        let dead: Vec<Id> = (0..active.0).filter(|_| rng.gen_bool(0.2)).map(Id).collect();
        state.remove(&dead).unwrap();
        let head: Arc<[Pattern<i64>]> = (0..rng.gen_range(1..=3))
            .map(|_| Pattern::new(preds[rng.gen_range(0..preds.len())]))
            .collect::<Vec<_>>()
            .into();
        let guard = Guard::new(guards[rng.gen_range(0..guards.len())]);
        let active_value = Arc::new(*values.last().unwrap());
        let lazy: BTreeSet<(usize, Vec<Id>)> =
            match_head(head.clone(), guard.clone(), active, active_value.clone(), &state, false)
                .materialize(&state)
                .unwrap()
                .into_iter()
                .map(|m| (m.active_pos, m.ids))
                .collect();
        let naive: BTreeSet<(usize, Vec<Id>)> = naive_all_matchings(&head, &guard, active, &active_value, &state)
            .into_iter()
            .map(|m| (m.active_pos, m.ids))
            .collect();
        if lazy != naive {
            return outcome(false, format!("case {case}: lazy {lazy:?} vs naive {naive:?}"));
        }
        total += naive.len();
    }
    outcome(true, format!("200 instances, {total} matchings"))
}

fn worked_example() -> Outcome {
    let (state, active) = state_with(vec![6_i64, 9, 12]);
    let head: Arc<[Pattern<i64>]> = vec![Pattern::new(|x: &i64| *x > 0), Pattern::new(|y: &i64| *y > 0)].into();
    let guard = Guard::new(|v: &[&i64]| v[0] <= v[1]);
    let got: Vec<Vec<Id>> = match_head(head, guard, active, Arc::new(12), &state, false)
        .materialize(&state)
        .unwrap()
        .into_iter()
        .map(|m| m.ids)
        .collect();
    let want = vec![vec![Id(0), Id(2)], vec![Id(1), Id(2)]];
    outcome(got == want, format!("{got:?}"))
}

#[derive(Debug, Clone, PartialEq)]
enum G {
    Edge(&'static str, &'static str),
    Path(&'static str, &'static str),
}

impl Constraint for G {
    type Key = &'static str;

    fn index(&self) -> Option<&'static str> {
        match self {
            G::Edge(_, t) => Some(t),
            G::Path(..) => None,
        }
    }
}

fn index_narrowing() -> Outcome {
    let (state, active) = state_with(vec![G::Edge("a", "b"), G::Edge("b", "c"), G::Path("b", "c")]);
    let relation: Vec<(&str, Id)> = state.index_relation().map(|(k, id)| (*k, id)).collect();
    let relation_ok = state.index_lookup(&"b") == vec![Id(0)] && state.index_lookup(&"c") == vec![Id(1)];

    let examined_with = |use_index: bool| -> Vec<Id> {
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        let head: Arc<[Pattern<G>]> = vec![
            Pattern::new(move |g: &G| {
                log.lock().unwrap().push(g.clone());
                matches!(g, G::Edge(..))
            })
            .indexed_by(1, |p: &G| match p {
                G::Path(s, _) => Some(*s),
                G::Edge(..) => None,
            }),
            Pattern::new(|g: &G| matches!(g, G::Path(..))),
        ]
        .into();
        let guard = Guard::new(|v: &[&G]| matches!((v[0], v[1]), (G::Edge(_, t), G::Path(s, _)) if t == s));
        let path = Arc::new(G::Path("b", "c"));
        match_head(head, guard, active, path.clone(), &state, use_index)
            .materialize(&state)
            .unwrap();
        let seen = seen.lock().unwrap();
        state
            .store()
            .filter(|(id, v)| *id != active && seen.contains(v))
            .map(|(id, _)| id)
            .collect()
    };
    let indexed = examined_with(true);
    let plain = examined_with(false);
    outcome(
        relation_ok && indexed == vec![Id(0)] && plain == vec![Id(0), Id(1)],
        format!("index {relation:?}; examined with index {indexed:?}, without {plain:?}"),
    )
}

/// Final multisets per instance, for the equivalence criterion.
#[derive(Default)]
struct Equivalence {
    compared: usize,
    mismatches: Vec<String>,
}

/// Runs every instance under all three configs and verifies completed stores.
fn correctness_suite(
    problem: Problem,
    sizes: &[u64],
    queries: usize,
    limit: Duration,
    min_rate: f64,
    eq: &mut Equivalence,
) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for &size in sizes {
        let instances = instance_set(problem, size, queries, 1000 + size);
        let mut completed = [0usize; 3];
        for (i, instance) in instances.iter().enumerate() {
            let mut stores: Vec<Option<FinalStore>> = Vec::new();
            for mode in MatchMode::ALL {
                let run = instance.run(mode, Some(limit)).unwrap();
                stores.push(run.store);
            }
            for (m, store) in stores.iter().enumerate() {
                let Some(store) = store else { continue };
                completed[m] += 1;
                if let Err(e) = instance.verify(store) {
                    pass = false;
                    notes.push(format!("n={size} #{i} {}: {e}", MatchMode::ALL[m]));
                }
            }
            let done: Vec<Vec<String>> = stores.iter().flatten().map(|s| s.multiset()).collect();
            if done.len() > 1 {
                eq.compared += 1;
                if done.windows(2).any(|w| w[0] != w[1]) {
                    eq.mismatches.push(format!("{problem} n={size} #{i}"));
                }
            }
        }
        let rates: Vec<String> = MatchMode::ALL
            .iter()
            .zip(completed)
            .map(|(m, c)| {
                let rate = c as f64 / queries as f64;
                if rate < min_rate {
                    pass = false;
                }
                format!("{m} {rate:.2}")
            })
            .collect();
        notes.push(format!("n={size}: {}", rates.join(", ")));
    }
    outcome(pass, notes.join("; "))
}

fn mean_ms(problem: Problem, size: u64, queries: usize, mode: MatchMode) -> Option<f64> {
    // Best of three sweeps to damp scheduler noise.
    (0..3)
        .filter_map(|_| {
            let spec = BenchSpec {
                queries,
                seed: 40,
                time_limit: Duration::from_secs(5),
                ..BenchSpec::new(problem, size, mode)
            };
            run_bench(&spec).unwrap().mean_runtime_ms
        })
        .min_by(f64::total_cmp)
}

fn performance_ordering() -> Outcome {
    let [eager, lazy, indexed] = MatchMode::ALL.map(|m| mean_ms(Problem::Shp, 40, 30, m).unwrap_or(f64::INFINITY));
    let shp_ok = lazy >= indexed * 1.15 && eager >= lazy * 1.15;
    let gcd_eager = mean_ms(Problem::Gcd, 1000, 100, MatchMode::Eager).unwrap_or(f64::INFINITY);
    let gcd_indexed = mean_ms(Problem::Gcd, 1000, 100, MatchMode::LazyIndexed).unwrap_or(f64::INFINITY);
    let gcd_ok = gcd_eager <= 3.0 * gcd_indexed;
    outcome(
        shp_ok && gcd_ok,
        format!(
            "SHP 40: indexed {indexed:.2} < lazy {lazy:.2} < eager {eager:.2} ms; \
             GCD 1000: eager {gcd_eager:.3} vs indexed {gcd_indexed:.3} ms"
        ),
    )
}

fn reapplication() -> Outcome {
    let edges = freechr::bench::gen_shp(20, &mut ChaCha8Rng::seed_from_u64(20));
    let mut notes = Vec::new();
    let mut pass = true;
    for mode in MatchMode::ALL {
        let fired = Arc::new(AtomicU64::new(0));
        let counter = Arc::clone(&fired);
        let cfg = SolverConfig::new(mode).with_trace(move |_, event| {
            if let StepEvent::Apply { fired: true, .. } = event {
                counter.fetch_add(1, Ordering::Relaxed);
            }
        });
        let store = primitive_paths()
            .run_query(edges.iter().cloned().map(GraphFact::Edge), &cfg)
            .unwrap();
        let paths = store.iter().filter(|f| f.is_path()).count();
        let mut per_edge: Vec<_> = store.iter().filter_map(|f| f.as_path()).map(|p| (p.source.clone(), p.target.clone(), p.weight)).collect();
        let mut expected: Vec<_> = edges.iter().map(|e| (e.source.clone(), e.target.clone(), e.weight)).collect();
        per_edge.sort();
        expected.sort();
        let calls = fired.load(Ordering::Relaxed);
        pass &= calls == 20 && paths == 20 && per_edge == expected;
        notes.push(format!("{mode}: {calls} firings, {paths} paths"));
    }
    outcome(pass, notes.join(", "))
}

fn state_invariants() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for mode in MatchMode::ALL {
        let program = gcd_program();
        let mut state = State::new([6_i64, 9, 12]);
        let mut steps = 0;
        loop {
            let event = program.step(&mut state, mode).unwrap();
            steps += 1;
            if let Err(e) = state.check_invariants() {
                pass = false;
                notes.push(format!("{mode} step {steps}: {e}"));
                break;
            }
            if event == StepEvent::Final {
                break;
            }
        }
        let store: Vec<i64> = state.store().map(|(_, v)| *v).collect();
        pass &= store == vec![3];
        notes.push(format!("{mode}: {steps} steps -> {store:?}"));
    }
    outcome(pass, notes.join(", "))
}

fn main() {
    let start = Instant::now();
    let mut eq = Equivalence::default();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("matcher soundness and completeness", matcher_vs_naive()),
        ("worked subtraction example", worked_example()),
        ("index narrowing", index_narrowing()),
    ];
    let secs = Duration::from_secs;
    results.push(("GCD correctness", correctness_suite(Problem::Gcd, &[10, 100, 1000], 100, secs(1), 1.0, &mut eq)));
    results.push(("SHP correctness", correctness_suite(Problem::Shp, &[10, 20], 100, secs(10), 1.0, &mut eq)));
    results.push(("LEV correctness", correctness_suite(Problem::Lev, &[10, 20], 50, secs(5), 0.5, &mut eq)));
    results.push((
        "config equivalence",
        outcome(
            eq.mismatches.is_empty() && eq.compared > 0,
            format!("{} instances compared, mismatches {:?}", eq.compared, eq.mismatches),
        ),
    ));
    results.push(("performance ordering", performance_ordering()));
    results.push(("reapplication prevention", reapplication()));
    results.push(("state invariants", state_invariants()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
