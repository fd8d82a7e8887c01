use crate::engine::{compose, rule, Body, Program};
use crate::matching::{Guard, Pattern};

/// Euclid by repeated subtraction over a multiset of integers.
///
/// `zero` drops zeros; `subtract` keeps `n`, removes `m` and adds `m - n`
/// whenever `0 < n <= m`.
pub fn gcd_program() -> Program<i64> {
    compose([
        rule(
            "zero",
            vec![],
            vec![Pattern::new(|n: &i64| *n == 0)],
            Guard::always(),
            Body::empty(),
        ),
        rule(
            "subtract",
            vec![Pattern::new(|n: &i64| 0 < *n)],
            vec![Pattern::new(|m: &i64| 0 < *m)],
            Guard::new(|v| v[0] <= v[1]),
            Body::new(|v| vec![v[1] - v[0]]),
        ),
    ])
}
