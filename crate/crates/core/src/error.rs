use std::time::Duration;

use thiserror::Error;

use crate::state::{Constraint, Id, State};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("top of the query is already active")]
    AlreadyActive,
    #[error("top of the query is not active")]
    NotActive,
    #[error("identifier {0} is not in the store")]
    UnknownId(Id),
}

/// Error raised by a user-supplied pattern, guard, body or key function.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct HostError(pub String);

impl HostError {
    pub fn new(msg: impl Into<String>) -> Self {
        HostError(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("rule `{rule}` raised: {source}")]
    Host {
        rule: String,
        #[source]
        source: HostError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Steps(u64),
    Time(Duration),
}

#[derive(Debug, Error)]
pub enum RunError<V: Constraint> {
    #[error("{limit:?} exceeded after {steps} steps")]
    LimitExceeded {
        limit: Limit,
        steps: u64,
        state: Box<State<V>>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl<V: Constraint> RunError<V> {
    pub fn is_limit(&self) -> bool {
        matches!(self, RunError::LimitExceeded { .. })
    }
}
