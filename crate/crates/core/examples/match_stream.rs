//! Pulling matchings one at a time from a live state.

use std::sync::Arc;

use freechr::{match_head, Guard, Id, Pattern, State};

fn main() {
    // Store {(0, 6), (1, 9)}, then 12 becomes active with id 2.
    let mut state = State::new([6_i64, 9, 12]);
    state.activate().unwrap();
    state.pop_query().unwrap();
    state.activate().unwrap();
    state.pop_query().unwrap();
    let active = state.activate().unwrap();

    // x, y with 0 < x <= y, as in the subtraction rule of gcd.
    let head: Arc<[Pattern<i64>]> = vec![Pattern::new(|x: &i64| *x > 0), Pattern::any()].into();
    let guard = Guard::new(|v: &[&i64]| 0 < *v[0] && v[0] <= v[1]);

    let mut stream = match_head(head.clone(), guard.clone(), active, Arc::new(12), &state, false);
    while let Some(m) = stream.next(&state).unwrap() {
        println!("active at {}: ids {:?}, values {:?}", m.active_pos, m.ids, m.value_refs());
    }

    // Matchings are validated against the state at each pull.
    let mut stream = match_head(head, guard, active, Arc::new(12), &state, false);
    let first = stream.next(&state).unwrap().unwrap();
    println!("first: {:?}", first.ids);
    state.remove(&[Id(1)]).unwrap();
    println!("after removing id 1: {:?}", stream.next(&state).unwrap().map(|m| m.ids));
}
