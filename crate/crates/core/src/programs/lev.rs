//! Levenshtein distance by memoized recursive decomposition, with a small
//! solver for the variable assignments the decomposition produces.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::engine::{compose, rule, Body, Program};
use crate::matching::{Guard, Pattern};
use crate::state::Constraint;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Var(String),
    Int(i64),
}

impl Operand {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Operand::Int(i) => Some(*i),
            Operand::Var(_) => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Int(_) => None,
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => f.write_str(v),
            Operand::Int(i) => write!(f, "{i}"),
        }
    }
}

/// Right-hand side of an assignment; `OnePlusMin` stands for
/// `1 + min(a, b, c)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rhs {
    Var(String),
    Int(i64),
    OnePlusMin([Operand; 3]),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub lhs: String,
    pub rhs: Rhs,
}

impl Assignment {
    pub fn new(lhs: impl Into<String>, rhs: Rhs) -> Self {
        Assignment {
            lhs: lhs.into(),
            rhs,
        }
    }

    fn int_rhs(&self) -> Option<i64> {
        match self.rhs {
            Rhs::Int(i) => Some(i),
            _ => None,
        }
    }

    fn var_rhs(&self) -> Option<&str> {
        match &self.rhs {
            Rhs::Var(v) => Some(v),
            _ => None,
        }
    }

    fn min_rhs(&self) -> Option<&[Operand; 3]> {
        match &self.rhs {
            Rhs::OnePlusMin(ops) => Some(ops),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevenshteinGoal {
    pub seq_a: Vec<i64>,
    pub seq_b: Vec<i64>,
    pub result_var: String,
}

impl LevenshteinGoal {
    pub fn new(seq_a: Vec<i64>, seq_b: Vec<i64>, result_var: impl Into<String>) -> Self {
        LevenshteinGoal {
            seq_a,
            seq_b,
            result_var: result_var.into(),
        }
    }

    fn key(&self) -> LevKey {
        LevKey::Seqs(format!("{:?}", self.seq_a), format!("{:?}", self.seq_b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevFact {
    Assign(Assignment),
    Ldist(LevenshteinGoal),
}

/// Assignments are indexed by their left-hand side, goals by the rendered
/// pair of sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LevKey {
    Var(String),
    Seqs(String, String),
}

impl Constraint for LevFact {
    type Key = LevKey;

    fn index(&self) -> Option<LevKey> {
        Some(match self {
            LevFact::Assign(a) => LevKey::Var(a.lhs.clone()),
            LevFact::Ldist(g) => g.key(),
        })
    }
}

impl LevFact {
    pub fn as_assignment(&self) -> Option<&Assignment> {
        match self {
            LevFact::Assign(a) => Some(a),
            LevFact::Ldist(_) => None,
        }
    }

    pub fn as_goal(&self) -> Option<&LevenshteinGoal> {
        match self {
            LevFact::Ldist(g) => Some(g),
            LevFact::Assign(_) => None,
        }
    }

    fn is_assignment(&self) -> bool {
        self.as_assignment().is_some()
    }

    fn is_goal(&self) -> bool {
        self.as_goal().is_some()
    }
}

impl From<Assignment> for LevFact {
    fn from(a: Assignment) -> Self {
        LevFact::Assign(a)
    }
}

impl From<LevenshteinGoal> for LevFact {
    fn from(g: LevenshteinGoal) -> Self {
        LevFact::Ldist(g)
    }
}

impl fmt::Display for LevFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevFact::Assign(a) => match &a.rhs {
                Rhs::Var(v) => write!(f, "{} := {v}", a.lhs),
                Rhs::Int(i) => write!(f, "{} := {i}", a.lhs),
                Rhs::OnePlusMin([x, y, z]) => write!(f, "{} := 1 + min({x}, {y}, {z})", a.lhs),
            },
            LevFact::Ldist(g) => write!(f, "ldist({:?}, {:?}, {})", g.seq_a, g.seq_b, g.result_var),
        }
    }
}

/// Fresh variable names for one run: `prefix` followed by a counter.
#[derive(Debug, Default)]
pub struct SymbolGenerator {
    next: AtomicU64,
}

impl SymbolGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn gensym(&self, prefix: &str) -> String {
        let n = self.next.fetch_add(1, Ordering::Relaxed);
        format!("{prefix}{n}")
    }
}

fn assign(v: &LevFact) -> &Assignment {
    v.as_assignment().expect("assignment pattern")
}

fn goal(v: &LevFact) -> &LevenshteinGoal {
    v.as_goal().expect("goal pattern")
}

fn var_key(name: Option<&str>) -> Option<LevKey> {
    name.map(|n| LevKey::Var(n.to_owned()))
}

/// `resolve k`: substitutes a known integer into operand `k` of a
/// `1 + min(..)` assignment.
fn resolve_operand(k: usize) -> Program<LevFact> {
    rule(
        format!("resolve {k}"),
        vec![Pattern::new(|x: &LevFact| {
            x.as_assignment().is_some_and(|a| a.int_rhs().is_some())
        })
        .indexed_by(1, move |y: &LevFact| {
            var_key(y.as_assignment().and_then(|a| a.min_rhs()).and_then(|ops| ops[k].as_var()))
        })],
        vec![Pattern::new(|y: &LevFact| {
            y.as_assignment().is_some_and(|a| a.min_rhs().is_some())
        })],
        Guard::new(move |v| {
            let (x, y) = (assign(v[0]), assign(v[1]));
            y.min_rhs().unwrap()[k].as_var() == Some(x.lhs.as_str())
        }),
        Body::new(move |v| {
            let (x, y) = (assign(v[0]), assign(v[1]));
            let mut ops = y.min_rhs().unwrap().clone();
            ops[k] = Operand::Int(x.int_rhs().unwrap());
            vec![Assignment::new(y.lhs.clone(), Rhs::OnePlusMin(ops)).into()]
        }),
    )
}

pub fn assignment_solver() -> Program<LevFact> {
    compose([
        rule(
            "idem",
            vec![Pattern::new(LevFact::is_assignment)
                .indexed_by(1, |y: &LevFact| var_key(y.as_assignment().map(|a| a.lhs.as_str())))],
            vec![Pattern::new(LevFact::is_assignment)],
            Guard::new(|v| v[0] == v[1]),
            Body::empty(),
        ),
        rule(
            "trans",
            vec![Pattern::new(LevFact::is_assignment)
                .indexed_by(1, |y: &LevFact| var_key(y.as_assignment().and_then(|a| a.var_rhs())))],
            vec![Pattern::new(|y: &LevFact| {
                y.as_assignment().is_some_and(|a| a.var_rhs().is_some())
            })],
            Guard::new(|v| assign(v[1]).var_rhs() == Some(assign(v[0]).lhs.as_str())),
            Body::new(|v| {
                let (x, y) = (assign(v[0]), assign(v[1]));
                vec![Assignment::new(y.lhs.clone(), x.rhs.clone()).into()]
            }),
        ),
        rule(
            "fully resolved",
            vec![],
            vec![Pattern::new(|x: &LevFact| {
                x.as_assignment()
                    .and_then(|a| a.min_rhs())
                    .is_some_and(|ops| ops.iter().all(|o| o.as_int().is_some()))
            })],
            Guard::always(),
            Body::new(|v| {
                let x = assign(v[0]);
                let min = x
                    .min_rhs()
                    .unwrap()
                    .iter()
                    .filter_map(Operand::as_int)
                    .min()
                    .unwrap();
                vec![Assignment::new(x.lhs.clone(), Rhs::Int(1 + min)).into()]
            }),
        ),
        resolve_operand(0),
        resolve_operand(1),
        resolve_operand(2),
    ])
}

/// The assignment solver followed by memoization and the four recursive
/// equations. `gen` supplies the fresh result variables of sub-goals.
pub fn levenshtein_program(gen: Arc<SymbolGenerator>) -> Program<LevFact> {
    let distance_rules = compose([
        rule(
            "memoization",
            vec![Pattern::new(LevFact::is_goal)
                .indexed_by(1, |y: &LevFact| y.as_goal().map(LevenshteinGoal::key))],
            vec![Pattern::new(LevFact::is_goal)],
            Guard::new(|v| {
                let (x, y) = (goal(v[0]), goal(v[1]));
                x.seq_a == y.seq_a && x.seq_b == y.seq_b
            }),
            Body::new(|v| {
                let (x, y) = (goal(v[0]), goal(v[1]));
                vec![Assignment::new(y.result_var.clone(), Rhs::Var(x.result_var.clone())).into()]
            }),
        ),
        rule(
            "equation_1",
            vec![Pattern::new(|x: &LevFact| x.as_goal().is_some_and(|g| g.seq_b.is_empty()))],
            vec![],
            Guard::always(),
            Body::new(|v| {
                let x = goal(v[0]);
                vec![Assignment::new(x.result_var.clone(), Rhs::Int(x.seq_a.len() as i64)).into()]
            }),
        ),
        rule(
            "equation_2",
            vec![Pattern::new(|x: &LevFact| x.as_goal().is_some_and(|g| g.seq_a.is_empty()))],
            vec![],
            Guard::always(),
            Body::new(|v| {
                let x = goal(v[0]);
                vec![Assignment::new(x.result_var.clone(), Rhs::Int(x.seq_b.len() as i64)).into()]
            }),
        ),
        rule(
            "equation_3",
            vec![Pattern::new(|x: &LevFact| {
                x.as_goal().is_some_and(|g| {
                    matches!((g.seq_a.first(), g.seq_b.first()), (Some(a), Some(b)) if a == b)
                })
            })],
            vec![],
            Guard::always(),
            Body::new(|v| {
                let x = goal(v[0]);
                vec![LevenshteinGoal::new(
                    x.seq_a[1..].to_vec(),
                    x.seq_b[1..].to_vec(),
                    x.result_var.clone(),
                )
                .into()]
            }),
        ),
        rule(
            "equation_4",
            vec![Pattern::new(|x: &LevFact| {
                x.as_goal().is_some_and(|g| {
                    matches!((g.seq_a.first(), g.seq_b.first()), (Some(a), Some(b)) if a != b)
                })
            })],
            vec![],
            Guard::always(),
            Body::new(move |v| {
                let x = goal(v[0]);
                let (v1, v2, v3) = (gen.gensym("var"), gen.gensym("var"), gen.gensym("var"));
                vec![
                    Assignment::new(
                        x.result_var.clone(),
                        Rhs::OnePlusMin([
                            Operand::Var(v1.clone()),
                            Operand::Var(v2.clone()),
                            Operand::Var(v3.clone()),
                        ]),
                    )
                    .into(),
                    LevenshteinGoal::new(x.seq_a[1..].to_vec(), x.seq_b.clone(), v1).into(),
                    LevenshteinGoal::new(x.seq_a.clone(), x.seq_b[1..].to_vec(), v2).into(),
                    LevenshteinGoal::new(x.seq_a[1..].to_vec(), x.seq_b[1..].to_vec(), v3).into(),
                ]
            }),
        ),
    ]);
    compose([assignment_solver(), distance_rules])
}

/// Follows variable-to-variable assignments from `var` to an integer.
pub fn resolve<'a>(facts: impl IntoIterator<Item = &'a LevFact> + Clone, var: &str) -> Option<i64> {
    let mut current = var.to_owned();
    let mut seen = std::collections::HashSet::new();
    loop {
        if !seen.insert(current.clone()) {
            return None;
        }
        let mut next = None;
        for fact in facts.clone() {
            if let Some(a) = fact.as_assignment().filter(|a| a.lhs == current) {
                match &a.rhs {
                    Rhs::Int(i) => return Some(*i),
                    Rhs::Var(v) => next = Some(v.clone()),
                    Rhs::OnePlusMin(_) => {}
                }
            }
        }
        current = next?;
    }
}
