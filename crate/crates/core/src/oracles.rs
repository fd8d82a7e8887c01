//! Reference implementations for checking engine results.
//!
//! `euclid_gcd`, `floyd_warshall`, `lev_dp` and `naive_all_matchings` use no
//! engine machinery beyond reading a [`State`]. The `verify_*` helpers compare
//! a final store against them, and [`differential_run`] runs one instance
//! under every [`MatchMode`].

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Duration;

use crate::bench::Instance;
use crate::engine::MatchMode;
use crate::matching::{Guard, Matching, Pattern};
use crate::programs::lev::{resolve, LevFact};
use crate::programs::shp::{Edge, GraphFact, Node};
use crate::state::{Constraint, Id, State};

fn gcd2(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Greatest common divisor of positive integers; `None` for an empty list or
/// a non-positive entry.
pub fn euclid_gcd(values: &[i64]) -> Option<i64> {
    if values.is_empty() || values.iter().any(|v| *v <= 0) {
        return None;
    }
    Some(values.iter().copied().fold(0, gcd2))
}

/// All-pairs shortest distances. The map holds `(u, u) -> 0` for every node
/// and `(u, w) -> d` for every reachable pair.
#[allow(clippy::needless_range_loop)]
pub fn floyd_warshall(edges: &[Edge]) -> HashMap<(Node, Node), i64> {
    let nodes: BTreeSet<Node> = edges
        .iter()
        .flat_map(|e| [e.source.clone(), e.target.clone()])
        .collect();
    let nodes: Vec<Node> = nodes.into_iter().collect();
    let pos: HashMap<&Node, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let n = nodes.len();
    let mut dist = vec![vec![None::<i64>; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for e in edges {
        let (s, t) = (pos[&e.source], pos[&e.target]);
        dist[s][t] = Some(dist[s][t].map_or(e.weight, |d| d.min(e.weight)));
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = dist[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = dist[k][j] {
                    let via = ik + kj;
                    if dist[i][j].is_none_or(|d| via < d) {
                        dist[i][j] = Some(via);
                    }
                }
            }
        }
    }
    let mut out = HashMap::new();
    for i in 0..n {
        for j in 0..n {
            if let Some(d) = dist[i][j] {
                out.insert((nodes[i].clone(), nodes[j].clone()), d);
            }
        }
    }
    out
}

/// Edit distance by the usual dynamic program.
pub fn lev_dp<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Every matching of `head` around `(active_id, active_value)` by exhaustive
/// enumeration: each position the active value fits, times every injective
/// assignment of older alive ids to the other positions. Index hints are
/// ignored and host errors count as rejection. Returned in no particular
/// order.
pub fn naive_all_matchings<V: Constraint>(
    head: &[Pattern<V>],
    guard: &Guard<V>,
    active_id: Id,
    active_value: &Arc<V>,
    state: &State<V>,
) -> Vec<Matching<V>> {
    let mut out = Vec::new();
    if !state.alive(active_id) {
        return out;
    }
    let older: Vec<Id> = state
        .store()
        .map(|(id, _)| id)
        .filter(|id| *id < active_id)
        .collect();
    let n = head.len();
    for active_pos in 0..n {
        if !head[active_pos].matches(active_value).unwrap_or(false) {
            continue;
        }
        let others: Vec<usize> = (0..n).filter(|p| *p != active_pos).collect();
        for pick in injections(older.len(), others.len()) {
            let mut ids = vec![active_id; n];
            for (slot, &p) in others.iter().enumerate() {
                ids[p] = older[pick[slot]];
            }
            let values: Vec<Arc<V>> = ids
                .iter()
                .map(|id| {
                    if *id == active_id {
                        Arc::clone(active_value)
                    } else {
                        Arc::clone(state.lookup_shared(*id).expect("alive"))
                    }
                })
                .collect();
            let patterns_hold = (0..n).all(|p| head[p].matches(&values[p]).unwrap_or(false));
            let refs: Vec<&V> = values.iter().map(|v| &**v).collect();
            if patterns_hold && guard.check(&refs).unwrap_or(false) {
                out.push(Matching {
                    active_pos,
                    ids,
                    values,
                });
            }
        }
    }
    out
}

/// All sequences of `k` distinct indices below `n`.
fn injections(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn go(n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !current.contains(&i) {
                current.push(i);
                go(n, k, current, out);
                current.pop();
            }
        }
    }
    go(n, k, &mut current, &mut out);
    out
}

/// The final store of a gcd run must be exactly `{gcd(query)}`.
pub fn verify_gcd(query: &[i64], store: &[i64]) -> Result<(), String> {
    let expected = euclid_gcd(query).ok_or_else(|| format!("no gcd for {query:?}"))?;
    if store != [expected] {
        return Err(format!("query {query:?}: store {store:?}, expected [{expected}]"));
    }
    Ok(())
}

/// Every stored path must be a walk over input edges whose weight is the sum
/// of one edge weight per hop, and for every reachable pair of distinct nodes
/// the lightest stored path must weigh the shortest distance.
pub fn verify_shp(edges: &[Edge], store: &[GraphFact]) -> Result<(), String> {
    let mut hop_weights: HashMap<(&str, &str), BTreeSet<i64>> = HashMap::new();
    for e in edges {
        hop_weights
            .entry((&e.source, &e.target))
            .or_default()
            .insert(e.weight);
    }
    let mut best: HashMap<(Node, Node), i64> = HashMap::new();
    for fact in store {
        let Some(p) = fact.as_path() else { continue };
        if p.nodes.len() < 2
            || p.nodes.first() != Some(&p.source)
            || p.nodes.last() != Some(&p.target)
        {
            return Err(format!("{fact}: malformed node list"));
        }
        let mut sums = BTreeSet::from([0i64]);
        for hop in p.nodes.windows(2) {
            let Some(ws) = hop_weights.get(&(&*hop[0], &*hop[1])) else {
                return Err(format!("{fact}: no edge {} -> {}", hop[0], hop[1]));
            };
            sums = sums
                .iter()
                .flat_map(|s| ws.iter().map(move |w| s + w))
                .filter(|s| *s <= p.weight)
                .collect();
        }
        if !sums.contains(&p.weight) {
            return Err(format!("{fact}: weight does not match its edges"));
        }
        let w = best
            .entry((p.source.clone(), p.target.clone()))
            .or_insert(p.weight);
        *w = (*w).min(p.weight);
    }
    let dist = floyd_warshall(edges);
    for ((u, w), d) in &dist {
        if u == w {
            continue;
        }
        match best.get(&(u.clone(), w.clone())) {
            Some(found) if found == d => {}
            Some(found) => return Err(format!("{u} -> {w}: stored {found}, shortest {d}")),
            None => return Err(format!("{u} -> {w}: no stored path, shortest {d}")),
        }
    }
    for (u, w) in best.keys() {
        if u != w && !dist.contains_key(&(u.clone(), w.clone())) {
            return Err(format!("{u} -> {w}: stored path between unreachable nodes"));
        }
    }
    Ok(())
}

/// The goal's result variable must resolve to the edit distance.
pub fn verify_lev(seq_a: &[i64], seq_b: &[i64], result_var: &str, store: &[LevFact]) -> Result<(), String> {
    let expected = lev_dp(seq_a, seq_b) as i64;
    match resolve(store, result_var) {
        Some(d) if d == expected => Ok(()),
        Some(d) => Err(format!("{seq_a:?} / {seq_b:?}: resolved {d}, expected {expected}")),
        None => Err(format!("{seq_a:?} / {seq_b:?}: `{result_var}` unresolved")),
    }
}

/// One configuration's run inside a [`DiffReport`].
#[derive(Debug, Clone)]
pub struct ModeRun {
    pub mode: MatchMode,
    pub completed: bool,
    pub steps: u64,
    pub elapsed: Duration,
    /// Final store values rendered and sorted; ids are dropped since they
    /// may differ between configurations.
    pub multiset: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct DiffReport {
    pub runs: Vec<ModeRun>,
    /// Description of the first disagreement between completed runs.
    pub mismatch: Option<String>,
}

impl DiffReport {
    pub fn agrees(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Runs `instance` under every match mode and compares the final stores as
/// multisets.
pub fn differential_run(
    instance: &Instance,
    time_limit: Option<Duration>,
) -> Result<DiffReport, crate::EngineError> {
    let mut runs = Vec::new();
    for mode in MatchMode::ALL {
        let run = instance.run(mode, time_limit)?;
        runs.push(ModeRun {
            mode,
            completed: run.completed(),
            steps: run.steps,
            elapsed: run.elapsed,
            multiset: run.store.as_ref().map(|s| s.multiset()),
        });
    }
    let mut mismatch = None;
    let done: Vec<&ModeRun> = runs.iter().filter(|r| r.multiset.is_some()).collect();
    if let Some((first, rest)) = done.split_first() {
        let reference = first.multiset.as_ref().unwrap();
        for other in rest {
            let theirs = other.multiset.as_ref().unwrap();
            if theirs != reference {
                let only_ref: Vec<&String> = reference.iter().filter(|v| !theirs.contains(v)).collect();
                let only_other: Vec<&String> = theirs.iter().filter(|v| !reference.contains(v)).collect();
                mismatch = Some(format!(
                    "{} vs {}: sizes {} / {}, only in {}: {:?}, only in {}: {:?}",
                    first.mode,
                    other.mode,
                    reference.len(),
                    theirs.len(),
                    first.mode,
                    only_ref,
                    other.mode,
                    only_other
                ));
                break;
            }
        }
    }
    Ok(DiffReport { runs, mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_oracle() {
        assert_eq!(euclid_gcd(&[6, 9]), Some(3));
        assert_eq!(euclid_gcd(&[7]), Some(7));
        assert_eq!(euclid_gcd(&[6, 9, 12]), Some(3));
        assert_eq!(euclid_gcd(&[1000, 32]), Some(8));
        assert_eq!(euclid_gcd(&[]), None);
        assert_eq!(euclid_gcd(&[0, 3]), None);
    }

    #[test]
    fn floyd_warshall_triangle() {
        let d = floyd_warshall(&[Edge::new("a", "b", 1), Edge::new("b", "c", 2), Edge::new("a", "c", 5)]);
        assert_eq!(d[&("a".into(), "c".into())], 3);
        assert_eq!(d[&("a".into(), "b".into())], 1);
        assert!(!d.contains_key(&("c".into(), "a".into())));
        assert_eq!(d[&("a".into(), "a".into())], 0);
    }

    #[test]
    fn floyd_warshall_without_edges() {
        assert!(floyd_warshall(&[]).is_empty());
    }

    #[test]
    fn lev_dp_cases() {
        assert_eq!(lev_dp(b"kitten", b"sitting"), 3);
        assert_eq!(lev_dp(b"abc", b"abc"), 0);
        assert_eq!(lev_dp(b"abc", b""), 3);
        assert_eq!(lev_dp(b"", b"ab"), 2);
        assert_eq!(lev_dp(b"flaw", b"lawn"), 2);
    }

    #[test]
    fn injections_count() {
        assert_eq!(injections(4, 2).len(), 12);
        assert_eq!(injections(3, 0), vec![Vec::<usize>::new()]);
        assert!(injections(1, 2).is_empty());
    }

    #[test]
    fn verify_shp_rejects_missing_pair() {
        let edges = vec![Edge::new("a", "b", 1)];
        assert!(verify_shp(&edges, &[GraphFact::Edge(edges[0].clone())]).is_err());
    }
}
