//! All-pairs shortest paths, checked against Floyd-Warshall.

use freechr::oracles::{floyd_warshall, verify_shp};
use freechr::programs::{shortest_path_program, Edge, GraphFact};
use freechr::{MatchMode, SolverConfig};

fn main() {
    let edges = vec![
        Edge::new("a", "b", 4),
        Edge::new("b", "c", 3),
        Edge::new("a", "c", 9),
        Edge::new("c", "d", 1),
        Edge::new("d", "a", 2),
    ];
    let store: Vec<GraphFact> = shortest_path_program()
        .run_query(edges.iter().cloned().map(GraphFact::Edge), &SolverConfig::new(MatchMode::LazyIndexed))
        .expect("shortest paths terminate")
        .iter()
        .map(|f| (**f).clone())
        .collect();

    for fact in store.iter().filter(|f| f.is_path()) {
        println!("{fact}");
    }

    let dist = floyd_warshall(&edges);
    let mut pairs: Vec<_> = dist.iter().filter(|((u, v), _)| u != v).collect();
    pairs.sort();
    println!("floyd-warshall:");
    for ((u, v), d) in pairs {
        println!("  {u} -> {v}: {d}");
    }
    match verify_shp(&edges, &store) {
        Ok(()) => println!("store agrees with the oracle"),
        Err(e) => println!("mismatch: {e}"),
    }
}
