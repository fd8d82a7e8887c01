//! An embedded constraint handling rules engine.
//!
//! Programs are built from host-language functions: a [`rule`] combines kept
//! and removed head [`Pattern`]s with a [`Guard`] and a [`Body`], and
//! [`compose`] orders rules by priority. Execution follows a query stack of
//! values; each activated value walks the rules in order and pulls matchings
//! from a lazy stream that only pairs it with older store values, so no
//! matching fires twice. Patterns may carry an index hint that narrows
//! candidate lookup through the index relation.
//!
//! ```
//! use freechr::{compose, rule, Body, Guard, Pattern, SolverConfig};
//!
//! let gcd = compose([
//!     rule("zero", vec![], vec![Pattern::new(|n: &i64| *n == 0)], Guard::always(), Body::empty()),
//!     rule(
//!         "subtract",
//!         vec![Pattern::new(|n: &i64| 0 < *n)],
//!         vec![Pattern::new(|m: &i64| 0 < *m)],
//!         Guard::new(|v| v[0] <= v[1]),
//!         Body::new(|v| vec![v[1] - v[0]]),
//!     ),
//! ]);
//! let store = gcd.run_query([6, 9, 12], &SolverConfig::default()).unwrap();
//! assert_eq!(*store[0], 3);
//! ```

pub mod bench;
pub mod engine;
pub mod error;
pub mod matching;
pub mod oracles;
pub mod programs;
pub mod state;

pub use engine::{
    compose, rule, Body, MatchMode, Program, Rule, RunOutcome, SolverConfig, StepEvent, TraceHook,
};
pub use error::{EngineError, HostError, Limit, RunError, StateError};
pub use matching::{match_head, ActiveMatches, Guard, IndexHint, MatchStream, Matching, Pattern};
pub use state::{Constraint, Decoration, Id, QueryEntry, State};
