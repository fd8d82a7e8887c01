//! Rule construction, composition, and the step/run drivers.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{EngineError, HostError, Limit, RunError};
use crate::matching::{match_head, ActiveMatches, Guard, Pattern};
use crate::state::{Constraint, Decoration, State};

type BodyFn<V> = dyn Fn(&[&V]) -> Result<Vec<V>, HostError> + Send + Sync;

/// Produces the values to add to the query once a rule fires.
pub struct Body<V: Constraint>(Arc<BodyFn<V>>);

impl<V: Constraint> Clone for Body<V> {
    fn clone(&self) -> Self {
        Body(Arc::clone(&self.0))
    }
}

impl<V: Constraint> Body<V> {
    pub fn new(f: impl Fn(&[&V]) -> Vec<V> + Send + Sync + 'static) -> Self {
        Body(Arc::new(move |vs| Ok(f(vs))))
    }

    pub fn try_new(
        f: impl Fn(&[&V]) -> Result<Vec<V>, HostError> + Send + Sync + 'static,
    ) -> Self {
        Body(Arc::new(f))
    }

    /// Adds nothing.
    pub fn empty() -> Self {
        Self::new(|_| Vec::new())
    }

    pub fn eval(&self, values: &[&V]) -> Result<Vec<V>, HostError> {
        (self.0)(values)
    }
}

/// How matchings are computed when a rule is first tried for an active value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchMode {
    /// Materialize every matching up front; index decorations ignored.
    Eager,
    /// Lazy matching stream; index decorations ignored.
    Lazy,
    /// Lazy matching stream with index narrowing.
    LazyIndexed,
}

impl MatchMode {
    pub const ALL: [MatchMode; 3] = [MatchMode::Eager, MatchMode::Lazy, MatchMode::LazyIndexed];

    pub fn uses_index(self) -> bool {
        self == MatchMode::LazyIndexed
    }

    pub fn name(self) -> &'static str {
        match self {
            MatchMode::Eager => "eager",
            MatchMode::Lazy => "lazy",
            MatchMode::LazyIndexed => "indexed",
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eager" => Ok(MatchMode::Eager),
            "lazy" => Ok(MatchMode::Lazy),
            "indexed" => Ok(MatchMode::LazyIndexed),
            other => Err(format!("unknown config `{other}` (expected eager, lazy or indexed)")),
        }
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// The query was empty; nothing changed.
    Final,
    Activate,
    /// The active value was dead or had tried every rule.
    Drop,
    /// Rule `rule` was tried; `fired` is false when its matchings were
    /// exhausted and the rule index advanced instead.
    Apply { rule: usize, fired: bool },
}

pub type TraceHook = Arc<dyn Fn(u64, StepEvent) + Send + Sync>;

#[derive(Clone)]
pub struct SolverConfig {
    pub mode: MatchMode,
    pub step_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub trace: Option<TraceHook>,
}

impl SolverConfig {
    pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;
    /// Steps between wall-clock checks.
    pub const TIME_CHECK_INTERVAL: u64 = 256;

    pub fn new(mode: MatchMode) -> Self {
        SolverConfig {
            mode,
            step_limit: Some(Self::DEFAULT_STEP_LIMIT),
            time_limit: None,
            trace: None,
        }
    }

    pub fn with_step_limit(mut self, limit: Option<u64>) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn with_time_limit(mut self, limit: Option<Duration>) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn with_trace(mut self, hook: impl Fn(u64, StepEvent) + Send + Sync + 'static) -> Self {
        self.trace = Some(Arc::new(hook));
        self
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(MatchMode::LazyIndexed)
    }
}

impl fmt::Debug for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverConfig")
            .field("mode", &self.mode)
            .field("step_limit", &self.step_limit)
            .field("time_limit", &self.time_limit)
            .field("trace", &self.trace.is_some())
            .finish()
    }
}

/// A single rule: head patterns (kept first, then removed), guard and body.
pub struct Rule<V: Constraint> {
    name: String,
    kept: usize,
    head: Arc<[Pattern<V>]>,
    guard: Guard<V>,
    body: Body<V>,
}

impl<V: Constraint> fmt::Debug for Rule<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule")
            .field("name", &self.name)
            .field("kept", &self.kept)
            .field("removed", &self.removed())
            .finish()
    }
}

impl<V: Constraint> Rule<V> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kept(&self) -> usize {
        self.kept
    }

    pub fn removed(&self) -> usize {
        self.head.len() - self.kept
    }

    pub fn head(&self) -> &Arc<[Pattern<V>]> {
        &self.head
    }

    pub fn guard(&self) -> &Guard<V> {
        &self.guard
    }

    fn host(&self, source: HostError) -> EngineError {
        EngineError::Host {
            rule: self.name.clone(),
            source,
        }
    }

    /// Tries this rule for the active value on top of the query. Returns
    /// whether a matching was consumed.
    pub fn apply(&self, state: &mut State<V>, mode: MatchMode) -> Result<bool, EngineError> {
        let (active_id, active_value) = match state.query_top() {
            Some(entry) => match entry.decoration {
                Decoration::Active { id, .. } => (id, Arc::clone(&entry.value)),
                Decoration::Inactive => return Err(crate::StateError::NotActive.into()),
            },
            None => return Err(crate::StateError::EmptyQuery.into()),
        };
        let (rule_idx, matches) = state.take_active_iterator()?;
        let mut matches = match matches {
            Some(m) => m,
            None => {
                let mut stream = match_head(
                    Arc::clone(&self.head),
                    self.guard.clone(),
                    active_id,
                    active_value,
                    state,
                    mode.uses_index(),
                );
                match mode {
                    MatchMode::Eager => ActiveMatches::Eager(VecDeque::from(
                        stream.materialize(state).map_err(|e| self.host(e))?,
                    )),
                    MatchMode::Lazy | MatchMode::LazyIndexed => ActiveMatches::Lazy(stream),
                }
            }
        };

        let Some(matching) = matches.next(state).map_err(|e| self.host(e))? else {
            state.set_active_iterator(rule_idx + 1, None)?;
            return Ok(false);
        };

        if matching.active_pos >= self.kept {
            state.pop_query()?;
        } else {
            state.set_active_iterator(rule_idx, Some(matches))?;
        }
        state.remove(&matching.ids[self.kept..])?;
        let produced = self
            .body
            .eval(&matching.value_refs())
            .map_err(|e| self.host(e))?;
        state.push_query(produced);
        Ok(true)
    }
}

/// Ordered list of rules; earlier rules take priority.
pub struct Program<V: Constraint> {
    rules: Vec<Arc<Rule<V>>>,
}

impl<V: Constraint> Clone for Program<V> {
    fn clone(&self) -> Self {
        Program {
            rules: self.rules.clone(),
        }
    }
}

impl<V: Constraint> fmt::Debug for Program<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rules.iter()).finish()
    }
}

impl<V: Constraint> Default for Program<V> {
    fn default() -> Self {
        Program { rules: Vec::new() }
    }
}

/// Builds a single-rule program.
pub fn rule<V: Constraint>(
    name: impl Into<String>,
    kept: Vec<Pattern<V>>,
    removed: Vec<Pattern<V>>,
    guard: Guard<V>,
    body: Body<V>,
) -> Program<V> {
    let kept_len = kept.len();
    let head: Vec<Pattern<V>> = kept.into_iter().chain(removed).collect();
    Program {
        rules: vec![Arc::new(Rule {
            name: name.into(),
            kept: kept_len,
            head: head.into(),
            guard,
            body,
        })],
    }
}

/// Concatenates programs, preserving order.
pub fn compose<V: Constraint>(programs: impl IntoIterator<Item = Program<V>>) -> Program<V> {
    Program {
        rules: programs.into_iter().flat_map(|p| p.rules).collect(),
    }
}

/// `compose!(a, b, c)` is `compose([a, b, c])`.
#[macro_export]
macro_rules! compose {
    ($($p:expr),* $(,)?) => {
        $crate::engine::compose([$($p),*])
    };
}

/// Result of a run that reached a final state.
#[derive(Debug)]
pub struct RunOutcome<V: Constraint> {
    pub state: State<V>,
    pub steps: u64,
    pub elapsed: Duration,
}

impl<V: Constraint> Program<V> {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[Arc<Rule<V>>] {
        &self.rules
    }

    pub fn rule_names(&self) -> Vec<&str> {
        self.rules.iter().map(|r| r.name()).collect()
    }

    /// Appends `other` after this program's rules.
    pub fn then(mut self, other: Program<V>) -> Program<V> {
        self.rules.extend(other.rules);
        self
    }

    pub fn step(&self, state: &mut State<V>, mode: MatchMode) -> Result<StepEvent, EngineError> {
        let Some(top) = state.query_top() else {
            return Ok(StepEvent::Final);
        };
        match top.decoration {
            Decoration::Inactive => {
                state.activate()?;
                Ok(StepEvent::Activate)
            }
            Decoration::Active { id, rule_idx, .. } => {
                if !state.alive(id) || rule_idx >= self.rules.len() {
                    state.pop_query()?;
                    return Ok(StepEvent::Drop);
                }
                let fired = self.rules[rule_idx].apply(state, mode)?;
                Ok(StepEvent::Apply {
                    rule: rule_idx,
                    fired,
                })
            }
        }
    }

    /// Steps until the query is empty or a limit in `cfg` is hit.
    pub fn run(&self, mut state: State<V>, cfg: &SolverConfig) -> Result<RunOutcome<V>, RunError<V>> {
        let start = Instant::now();
        let mut steps: u64 = 0;
        while !state.is_final() {
            if let Some(limit) = cfg.step_limit {
                if steps >= limit {
                    return Err(RunError::LimitExceeded {
                        limit: Limit::Steps(limit),
                        steps,
                        state: Box::new(state),
                    });
                }
            }
            if let Some(limit) = cfg.time_limit {
                if steps.is_multiple_of(SolverConfig::TIME_CHECK_INTERVAL) && start.elapsed() > limit {
                    return Err(RunError::LimitExceeded {
                        limit: Limit::Time(limit),
                        steps,
                        state: Box::new(state),
                    });
                }
            }
            let event = self.step(&mut state, cfg.mode)?;
            steps += 1;
            if let Some(trace) = &cfg.trace {
                trace(steps, event);
            }
        }
        if let Some(trace) = &cfg.trace {
            trace(steps, StepEvent::Final);
        }
        Ok(RunOutcome {
            state,
            steps,
            elapsed: start.elapsed(),
        })
    }

    /// Runs `query` from a fresh state and returns the final store values in
    /// id order.
    pub fn run_query(
        &self,
        query: impl IntoIterator<Item = V>,
        cfg: &SolverConfig,
    ) -> Result<Vec<Arc<V>>, RunError<V>> {
        let outcome = self.run(State::new(query), cfg)?;
        Ok(outcome.state.into_store_values())
    }
}
