//! Defining a constraint type with an index key and an indexed rule.
//!
//! Orders are indexed by customer; the join rule looks up only orders of the
//! customer it is paired with.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use freechr::{compose, rule, Body, Constraint, Guard, MatchMode, Pattern, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
enum Fact {
    Customer(String),
    Order { customer: String, amount: i64 },
    Total { customer: String, amount: i64 },
}

impl Constraint for Fact {
    type Key = String;

    fn index(&self) -> Option<String> {
        match self {
            Fact::Order { customer, .. } => Some(customer.clone()),
            _ => None,
        }
    }
}

fn main() {
    let examined = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&examined);

    // customer(c) starts a zero total.
    let open = rule(
        "open",
        vec![Pattern::new(|f: &Fact| matches!(f, Fact::Customer(_)))],
        vec![],
        Guard::always(),
        Body::new(|v: &[&Fact]| match v[0] {
            Fact::Customer(c) => vec![Fact::Total { customer: c.clone(), amount: 0 }],
            _ => vec![],
        }),
    );
    // order(c, a), total(c, t) <=> total(c, t + a)
    // Positions fill right to left, so the order pattern is keyed on the
    // total bound to its right.
    let add = rule(
        "add",
        vec![],
        vec![
            Pattern::new(move |f: &Fact| {
                counter.fetch_add(1, Ordering::Relaxed);
                matches!(f, Fact::Order { .. })
            })
            .indexed_by(1, |t: &Fact| match t {
                Fact::Total { customer, .. } => Some(customer.clone()),
                _ => None,
            }),
            Pattern::new(|f: &Fact| matches!(f, Fact::Total { .. })),
        ],
        Guard::new(|v: &[&Fact]| match (v[0], v[1]) {
            (Fact::Order { customer: a, .. }, Fact::Total { customer: b, .. }) => a == b,
            _ => false,
        }),
        Body::new(|v: &[&Fact]| match (v[0], v[1]) {
            (Fact::Order { amount: a, .. }, Fact::Total { customer, amount }) => {
                vec![Fact::Total { customer: customer.clone(), amount: amount + a }]
            }
            _ => vec![],
        }),
    );
    let program = compose([open, add]);

    let mut query = Vec::new();
    for (i, name) in ["ada", "bob", "cy"].iter().enumerate() {
        for k in 0..20 {
            query.push(Fact::Order { customer: name.to_string(), amount: (i as i64 + 1) * k });
        }
    }
    query.extend(["ada", "bob", "cy"].map(|c| Fact::Customer(c.into())));

    for mode in MatchMode::ALL {
        examined.store(0, Ordering::Relaxed);
        let store = program.run_query(query.clone(), &SolverConfig::new(mode)).expect("terminates");
        let totals: Vec<&Fact> = store.iter().map(|f| &**f).filter(|f| matches!(f, Fact::Total { .. })).collect();
        println!(
            "{:>7}: {totals:?}, order predicate calls: {}",
            mode.name(),
            examined.load(Ordering::Relaxed)
        );
    }
}
