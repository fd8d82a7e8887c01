//! Head matching as a lazy, pull-based stream.
//!
//! A [`MatchStream`] enumerates every way to complete a rule head around an
//! active value: the active value is tried at each head position from the
//! last to the first, and the remaining positions are filled right to left
//! by backtracking over older store values. The stream keeps only its
//! backtracking frames between pulls and reads the live store on every pull,
//! so values removed in the meantime are skipped and partial work built on
//! them is discarded.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Bound;
use std::sync::Arc;

use crate::error::HostError;
use crate::state::{Constraint, Id, State};

type PredicateFn<V> = dyn Fn(&V) -> Result<bool, HostError> + Send + Sync;
type KeyFn<V> = dyn Fn(&V) -> Result<Option<<V as Constraint>::Key>, HostError> + Send + Sync;
type GuardFn<V> = dyn Fn(&[&V]) -> Result<bool, HostError> + Send + Sync;

/// Index decoration of a pattern: the key of acceptable values is computed
/// from the value matched at `ref_pos`.
pub struct IndexHint<V: Constraint> {
    ref_pos: usize,
    key_fn: Arc<KeyFn<V>>,
}

impl<V: Constraint> Clone for IndexHint<V> {
    fn clone(&self) -> Self {
        IndexHint {
            ref_pos: self.ref_pos,
            key_fn: Arc::clone(&self.key_fn),
        }
    }
}

impl<V: Constraint> IndexHint<V> {
    pub fn ref_pos(&self) -> usize {
        self.ref_pos
    }

    pub fn key(&self, reference: &V) -> Result<Option<V::Key>, HostError> {
        (self.key_fn)(reference)
    }
}

/// A unary predicate over values, optionally decorated with an index hint.
///
/// Applying a pattern only ever evaluates the predicate; the hint is used by
/// the matcher to pick candidates.
pub struct Pattern<V: Constraint> {
    predicate: Arc<PredicateFn<V>>,
    hint: Option<IndexHint<V>>,
}

impl<V: Constraint> Clone for Pattern<V> {
    fn clone(&self) -> Self {
        Pattern {
            predicate: Arc::clone(&self.predicate),
            hint: self.hint.clone(),
        }
    }
}

impl<V: Constraint> fmt::Debug for Pattern<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pattern")
            .field("ref_pos", &self.hint.as_ref().map(|h| h.ref_pos))
            .finish_non_exhaustive()
    }
}

impl<V: Constraint> Pattern<V> {
    pub fn new(predicate: impl Fn(&V) -> bool + Send + Sync + 'static) -> Self {
        Self::try_new(move |v| Ok(predicate(v)))
    }

    pub fn try_new(
        predicate: impl Fn(&V) -> Result<bool, HostError> + Send + Sync + 'static,
    ) -> Self {
        Pattern {
            predicate: Arc::new(predicate),
            hint: None,
        }
    }

    /// Accepts every value.
    pub fn any() -> Self {
        Self::new(|_| true)
    }

    /// Decorates the pattern: values for this position are looked up in the
    /// index relation under `key_fn(value at ref_pos)`. A key function that
    /// returns `None` declares that no value can match under that reference.
    pub fn indexed_by(
        self,
        ref_pos: usize,
        key_fn: impl Fn(&V) -> Option<V::Key> + Send + Sync + 'static,
    ) -> Self {
        self.try_indexed_by(ref_pos, move |v| Ok(key_fn(v)))
    }

    pub fn try_indexed_by(
        mut self,
        ref_pos: usize,
        key_fn: impl Fn(&V) -> Result<Option<V::Key>, HostError> + Send + Sync + 'static,
    ) -> Self {
        self.hint = Some(IndexHint {
            ref_pos,
            key_fn: Arc::new(key_fn),
        });
        self
    }

    pub fn hint(&self) -> Option<&IndexHint<V>> {
        self.hint.as_ref()
    }

    pub fn matches(&self, value: &V) -> Result<bool, HostError> {
        (self.predicate)(value)
    }
}

/// Predicate over a complete head instantiation.
pub struct Guard<V: Constraint>(Arc<GuardFn<V>>);

impl<V: Constraint> Clone for Guard<V> {
    fn clone(&self) -> Self {
        Guard(Arc::clone(&self.0))
    }
}

impl<V: Constraint> Guard<V> {
    pub fn new(f: impl Fn(&[&V]) -> bool + Send + Sync + 'static) -> Self {
        Guard(Arc::new(move |vs| Ok(f(vs))))
    }

    pub fn try_new(f: impl Fn(&[&V]) -> Result<bool, HostError> + Send + Sync + 'static) -> Self {
        Guard(Arc::new(f))
    }

    pub fn always() -> Self {
        Self::new(|_| true)
    }

    pub fn check(&self, values: &[&V]) -> Result<bool, HostError> {
        (self.0)(values)
    }
}

/// One instantiation of a rule head.
pub struct Matching<V: Constraint> {
    /// Head position taken by the active value.
    pub active_pos: usize,
    pub ids: Vec<Id>,
    pub values: Vec<Arc<V>>,
}

impl<V: Constraint> Matching<V> {
    pub fn value_refs(&self) -> Vec<&V> {
        self.values.iter().map(|v| &**v).collect()
    }

    fn all_alive(&self, state: &State<V>) -> bool {
        self.ids.iter().all(|id| state.alive(*id))
    }
}

impl<V: Constraint> Clone for Matching<V> {
    fn clone(&self) -> Self {
        Matching {
            active_pos: self.active_pos,
            ids: self.ids.clone(),
            values: self.values.clone(),
        }
    }
}

impl<V: Constraint> PartialEq for Matching<V> {
    fn eq(&self, other: &Self) -> bool {
        self.active_pos == other.active_pos && self.ids == other.ids && self.values == other.values
    }
}

impl<V: Constraint> fmt::Debug for Matching<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matching")
            .field("active_pos", &self.active_pos)
            .field("ids", &self.ids)
            .field("values", &self.values)
            .finish()
    }
}

enum Candidates<K> {
    Store,
    Indexed(K),
    Empty,
}

struct Frame<K> {
    pos: usize,
    candidates: Candidates<K>,
    /// Last id examined at this position.
    cursor: Option<Id>,
}

enum Resume {
    NextBranch,
    Descend(usize),
    Complete,
    Backtrack,
}

/// Lazy sequence of matchings for one active value and one rule head.
pub struct MatchStream<V: Constraint> {
    head: Arc<[Pattern<V>]>,
    guard: Guard<V>,
    active_id: Id,
    active_value: Arc<V>,
    use_index: bool,
    /// Active positions still to try are `0..untried`.
    untried: usize,
    /// Active position of the branch in progress.
    branch: Option<usize>,
    bound: Vec<Option<Id>>,
    frames: Vec<Frame<V::Key>>,
    done: bool,
}

impl<V: Constraint> fmt::Debug for MatchStream<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatchStream")
            .field("active_id", &self.active_id)
            .field("branch", &self.branch)
            .field("bound", &self.bound)
            .field("done", &self.done)
            .finish_non_exhaustive()
    }
}

/// Starts matching `head` and `guard` around the active value
/// `(active_id, active_value)`.
///
/// With `use_index` set, decorated patterns narrow their candidates through
/// the index relation; otherwise decorations are ignored. If `active_id` is
/// not alive in `state` the stream is empty.
pub fn match_head<V: Constraint>(
    head: Arc<[Pattern<V>]>,
    guard: Guard<V>,
    active_id: Id,
    active_value: Arc<V>,
    state: &State<V>,
    use_index: bool,
) -> MatchStream<V> {
    let n = head.len();
    MatchStream {
        head,
        guard,
        active_id,
        active_value,
        use_index,
        untried: n,
        branch: None,
        bound: vec![None; n],
        frames: Vec::new(),
        done: !state.alive(active_id),
    }
}

impl<V: Constraint> MatchStream<V> {
    pub fn active_id(&self) -> Id {
        self.active_id
    }

    pub fn is_exhausted(&self) -> bool {
        self.done
    }

    /// Pulls the next matching that is valid in `state`.
    pub fn next(&mut self, state: &State<V>) -> Result<Option<Matching<V>>, HostError> {
        if self.done {
            return Ok(None);
        }
        if !state.alive(self.active_id) {
            self.finish();
            return Ok(None);
        }
        let mut resume = if self.branch.is_some() {
            self.discard_stale(state);
            Resume::Backtrack
        } else {
            Resume::NextBranch
        };
        loop {
            resume = match resume {
                Resume::NextBranch => match self.next_branch()? {
                    Some(last) => Resume::Descend(last),
                    None => {
                        self.finish();
                        return Ok(None);
                    }
                },
                Resume::Descend(pos) => self.descend(pos, state)?,
                Resume::Complete => {
                    let refs = self.bound_refs(state);
                    if self.guard.check(&refs)? {
                        return Ok(Some(self.emit(state)));
                    }
                    Resume::Backtrack
                }
                Resume::Backtrack => self.backtrack(state)?,
            };
        }
    }

    fn finish(&mut self) {
        self.done = true;
        self.branch = None;
        self.frames.clear();
    }

    /// Picks the next active position whose pattern accepts the active
    /// value and returns the position to start descending from.
    fn next_branch(&mut self) -> Result<Option<usize>, HostError> {
        while self.untried > 0 {
            self.untried -= 1;
            let pos = self.untried;
            if self.head[pos].matches(&self.active_value)? {
                self.branch = Some(pos);
                self.bound.iter_mut().for_each(|b| *b = None);
                self.frames.clear();
                return Ok(Some(self.head.len() - 1));
            }
        }
        self.branch = None;
        Ok(None)
    }

    /// Drops frames whose bound value has died since the last pull, keeping
    /// the outermost dead frame so backtracking moves past it.
    fn discard_stale(&mut self, state: &State<V>) {
        let dead = self.frames.iter().position(|f| {
            self.bound[f.pos].is_some_and(|id| !state.alive(id))
        });
        if let Some(k) = dead {
            for f in self.frames.drain(k + 1..) {
                self.bound[f.pos] = None;
            }
        }
    }

    fn descend(&mut self, from: usize, state: &State<V>) -> Result<Resume, HostError> {
        let active_pos = self.branch.expect("descend outside a branch");
        let mut pos = from as isize;
        while pos >= 0 {
            let j = pos as usize;
            if j == active_pos {
                if !self.active_hint_holds(j, state)? {
                    return Ok(Resume::Backtrack);
                }
                self.bound[j] = Some(self.active_id);
            } else {
                let candidates = self.candidates_for(j, state)?;
                self.frames.push(Frame {
                    pos: j,
                    candidates,
                    cursor: None,
                });
                if !self.advance_top(state)? {
                    self.frames.pop();
                    return Ok(Resume::Backtrack);
                }
            }
            pos -= 1;
        }
        Ok(Resume::Complete)
    }

    fn backtrack(&mut self, state: &State<V>) -> Result<Resume, HostError> {
        while let Some(top) = self.frames.last() {
            let pos = top.pos;
            self.bound[pos] = None;
            if self.advance_top(state)? {
                return Ok(if pos == 0 {
                    Resume::Complete
                } else {
                    Resume::Descend(pos - 1)
                });
            }
            self.frames.pop();
        }
        Ok(Resume::NextBranch)
    }

    /// The hint of the pattern at position `pos`, when it applies: indexing is
    /// enabled and the reference position is already bound.
    fn usable_hint(&self, pos: usize) -> Option<(&IndexHint<V>, Id)> {
        if !self.use_index {
            return None;
        }
        let hint = self.head[pos].hint()?;
        if hint.ref_pos <= pos || hint.ref_pos >= self.head.len() {
            return None;
        }
        Some((hint, self.bound[hint.ref_pos]?))
    }

    fn active_hint_holds(&self, pos: usize, state: &State<V>) -> Result<bool, HostError> {
        let Some((hint, ref_id)) = self.usable_hint(pos) else {
            return Ok(true);
        };
        let Some(reference) = self.value_of(ref_id, state) else {
            return Ok(false);
        };
        Ok(match hint.key(reference)? {
            Some(key) => state.index_contains(&key, self.active_id),
            None => false,
        })
    }

    fn candidates_for(&self, pos: usize, state: &State<V>) -> Result<Candidates<V::Key>, HostError> {
        let Some((hint, ref_id)) = self.usable_hint(pos) else {
            return Ok(Candidates::Store);
        };
        let Some(reference) = self.value_of(ref_id, state) else {
            return Ok(Candidates::Empty);
        };
        Ok(match hint.key(reference)? {
            Some(key) => Candidates::Indexed(key),
            None => Candidates::Empty,
        })
    }

    fn value_of<'s>(&'s self, id: Id, state: &'s State<V>) -> Option<&'s V> {
        if id == self.active_id {
            Some(&self.active_value)
        } else {
            state.lookup(id)
        }
    }

    /// Moves the top frame to its next acceptable candidate and binds it.
    fn advance_top(&mut self, state: &State<V>) -> Result<bool, HostError> {
        let frame = self.frames.last_mut().expect("advance without frame");
        let pattern = &self.head[frame.pos];
        let used = &self.bound[frame.pos + 1..];
        let lower = frame.cursor.map_or(Bound::Unbounded, Bound::Excluded);
        let range = (lower, Bound::Excluded(self.active_id));
        let found = match &frame.candidates {
            Candidates::Empty => None,
            Candidates::Store => {
                let mut found = None;
                for (id, value) in state.store_map().range(range) {
                    frame.cursor = Some(*id);
                    if used.contains(&Some(*id)) {
                        continue;
                    }
                    if pattern.matches(value)? {
                        found = Some(*id);
                        break;
                    }
                }
                found
            }
            Candidates::Indexed(key) => {
                let mut found = None;
                if let Some(ids) = state.index_set(key) {
                    for id in ids.range(range) {
                        frame.cursor = Some(*id);
                        if used.contains(&Some(*id)) {
                            continue;
                        }
                        let Some(value) = state.lookup(*id) else {
                            continue;
                        };
                        if pattern.matches(value)? {
                            found = Some(*id);
                            break;
                        }
                    }
                }
                found
            }
        };
        let pos = frame.pos;
        self.bound[pos] = found;
        Ok(found.is_some())
    }

    fn bound_refs<'s>(&'s self, state: &'s State<V>) -> Vec<&'s V> {
        self.bound
            .iter()
            .map(|id| {
                let id = id.expect("complete assignment");
                self.value_of(id, state).expect("bound value alive")
            })
            .collect()
    }

    fn emit(&self, state: &State<V>) -> Matching<V> {
        let ids: Vec<Id> = self.bound.iter().map(|id| id.expect("complete")).collect();
        let values = ids
            .iter()
            .map(|id| {
                if *id == self.active_id {
                    Arc::clone(&self.active_value)
                } else {
                    Arc::clone(state.lookup_shared(*id).expect("bound value alive"))
                }
            })
            .collect();
        Matching {
            active_pos: self.branch.expect("complete branch"),
            ids,
            values,
        }
    }

    /// Pulls until exhausted. The state must not change in between.
    pub fn materialize(&mut self, state: &State<V>) -> Result<Vec<Matching<V>>, HostError> {
        let mut out = Vec::new();
        while let Some(m) = self.next(state)? {
            out.push(m);
        }
        Ok(out)
    }
}

/// Matchings attached to an active value for its current rule.
#[derive(Debug)]
pub enum ActiveMatches<V: Constraint> {
    Lazy(MatchStream<V>),
    /// Fully materialized when the rule was first tried.
    Eager(VecDeque<Matching<V>>),
}

impl<V: Constraint> ActiveMatches<V> {
    /// Next matching whose ids are all alive in `state`.
    pub fn next(&mut self, state: &State<V>) -> Result<Option<Matching<V>>, HostError> {
        match self {
            ActiveMatches::Lazy(stream) => stream.next(state),
            ActiveMatches::Eager(list) => {
                while let Some(m) = list.pop_front() {
                    if m.all_alive(state) {
                        return Ok(Some(m));
                    }
                }
                Ok(None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::naive_all_matchings;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Store holds the earlier values; the last one is active on top.
    fn state_with(values: &[i64]) -> (State<i64>, Id) {
        let mut state = State::new(values.iter().copied());
        let mut id = Id(0);
        for i in 0..values.len() {
            id = state.activate().unwrap();
            if i + 1 < values.len() {
                state.pop_query().unwrap();
            }
        }
        (state, id)
    }

    fn subtract_head() -> (Arc<[Pattern<i64>]>, Guard<i64>) {
        (
            vec![Pattern::new(|x: &i64| *x > 0), Pattern::any()].into(),
            Guard::new(|v: &[&i64]| 0 < *v[0] && v[0] <= v[1]),
        )
    }

    fn drain(stream: &mut MatchStream<i64>, state: &State<i64>) -> Vec<Matching<i64>> {
        let mut out = Vec::new();
        while let Some(m) = stream.next(state).unwrap() {
            out.push(m);
        }
        out
    }

    #[test]
    fn worked_example() {
        let (state, active) = state_with(&[6, 9, 12]);
        assert_eq!(active, Id(2));
        let (head, guard) = subtract_head();
        let mut s = match_head(head, guard, active, Arc::new(12), &state, false);
        let got: Vec<(usize, Vec<Id>)> = drain(&mut s, &state)
            .into_iter()
            .map(|m| (m.active_pos, m.ids))
            .collect();
        assert_eq!(got, vec![(1, vec![Id(0), Id(2)]), (1, vec![Id(1), Id(2)])]);
        assert!(s.is_exhausted());
        assert_eq!(s.next(&state).unwrap(), None);
    }

    #[test]
    fn single_pattern_on_empty_store() {
        let (state, active) = state_with(&[5]);
        let head: Arc<[Pattern<i64>]> = vec![Pattern::any()].into();
        let mut s = match_head(head, Guard::always(), active, Arc::new(5), &state, true);
        let m = s.next(&state).unwrap().unwrap();
        assert_eq!((m.active_pos, m.ids), (0, vec![active]));
        assert_eq!(s.next(&state).unwrap(), None);
    }

    #[test]
    fn dead_active_gives_nothing() {
        let (mut state, active) = state_with(&[3, 4]);
        state.remove(&[active]).unwrap();
        let (head, guard) = subtract_head();
        let mut s = match_head(head, guard, active, Arc::new(4), &state, false);
        assert!(s.is_exhausted());
        assert_eq!(s.next(&state).unwrap(), None);
    }

    #[test]
    fn agrees_with_naive_enumeration() {
        let (state, active) = state_with(&[2, 7, 3, 8, 5]);
        let head: Arc<[Pattern<i64>]> =
            vec![Pattern::any(), Pattern::new(|x: &i64| x % 2 == 1), Pattern::any()].into();
        let guard = Guard::new(|v: &[&i64]| v[0] < v[2]);
        let mut s = match_head(head.clone(), guard.clone(), active, Arc::new(5), &state, false);
        let mut lazy = drain(&mut s, &state);
        let mut naive = naive_all_matchings(&head, &guard, active, &Arc::new(5), &state);
        let key = |m: &Matching<i64>| (m.active_pos, m.ids.clone());
        lazy.sort_by_key(key);
        naive.sort_by_key(key);
        assert_eq!(lazy, naive);
        assert!(!lazy.is_empty());
    }

    #[test]
    fn stale_matchings_are_skipped() {
        let (mut state, active) = state_with(&[4, 6, 8, 10]);
        let (head, guard) = subtract_head();
        let mut s = match_head(head.clone(), guard.clone(), active, Arc::new(10), &state, false);
        let first = s.next(&state).unwrap().unwrap();
        assert_eq!(first.ids, vec![Id(0), Id(3)]);
        state.remove(&[Id(1)]).unwrap();
        let rest = drain(&mut s, &state);
        assert!(rest.iter().all(|m| m.ids.iter().all(|id| state.alive(*id))));
        let expected: Vec<Matching<i64>> = naive_all_matchings(&head, &guard, active, &Arc::new(10), &state)
            .into_iter()
            .filter(|m| *m != first)
            .collect();
        assert_eq!(rest, expected);
    }

    #[test]
    fn pulls_are_lazy() {
        let calls = Arc::new(AtomicUsize::new(0));
        let counter = Arc::clone(&calls);
        let (state, active) = state_with(&(1..=50).collect::<Vec<_>>());
        let head: Arc<[Pattern<i64>]> = vec![
            Pattern::new(move |_: &i64| {
                counter.fetch_add(1, Ordering::SeqCst);
                true
            }),
            Pattern::any(),
        ]
        .into();
        let mut s = match_head(head, Guard::always(), active, Arc::new(50), &state, false);
        s.next(&state).unwrap().unwrap();
        let after_first = calls.load(Ordering::SeqCst);
        assert!(after_first <= 3, "first pull evaluated {after_first} predicates");
        let all = s.materialize(&state).unwrap();
        assert_eq!(all.len() + 1, 2 * 49);
        assert!(calls.load(Ordering::SeqCst) > after_first);
    }

    #[test]
    fn index_narrows_candidates() {
        let calls = Arc::new(AtomicUsize::new(0));
        let counter = Arc::clone(&calls);
        // Key on parity.
        #[derive(Debug, Clone, PartialEq)]
        struct P(i64);
        impl Constraint for P {
            type Key = i64;
            fn index(&self) -> Option<i64> {
                Some(self.0 % 2)
            }
        }
        let mut state = State::new((0..20).map(P));
        let mut active = Id(0);
        for i in 0..20 {
            active = state.activate().unwrap();
            if i < 19 {
                state.pop_query().unwrap();
            }
        }
        let head: Arc<[Pattern<P>]> = vec![
            Pattern::new(move |_: &P| {
                counter.fetch_add(1, Ordering::SeqCst);
                true
            })
            .indexed_by(1, |y: &P| Some(y.0 % 2)),
            Pattern::new(|p: &P| p.0 == 19),
        ]
        .into();
        let guard = Guard::new(|v: &[&P]| v[0].0 % 2 == v[1].0 % 2);
        let mut plain = match_head(head.clone(), guard.clone(), active, Arc::new(P(19)), &state, false);
        let a = plain.materialize(&state).unwrap();
        let plain_calls = calls.swap(0, Ordering::SeqCst);
        let mut indexed = match_head(head, guard, active, Arc::new(P(19)), &state, true);
        let b = indexed.materialize(&state).unwrap();
        let indexed_calls = calls.load(Ordering::SeqCst);
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
        assert!(indexed_calls < plain_calls, "{indexed_calls} vs {plain_calls}");
    }
}
