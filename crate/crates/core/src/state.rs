//! Execution state: the query stack, the identified store, the identifier
//! counter and the index relation, plus the primitive transformations the
//! drivers are built from.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::error::StateError;
use crate::matching::ActiveMatches;

/// Unique identifier of a value in the store.
///
/// Identifiers are handed out in activation order, so comparing two ids tells
/// which value entered the store first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Id(pub u64);

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A value the engine can rewrite.
///
/// `index` is the optional index capability: values that return a key are
/// registered under it in the index relation when they are activated, which
/// lets decorated patterns narrow their candidates. It must be deterministic.
pub trait Constraint: fmt::Debug + PartialEq + Send + Sync + 'static {
    type Key: Clone + Eq + Hash + fmt::Debug + Send + Sync + 'static;

    fn index(&self) -> Option<Self::Key> {
        None
    }
}

macro_rules! unindexed_constraint {
    ($($t:ty),*) => {
        $(impl Constraint for $t {
            type Key = ();
        })*
    };
}

unindexed_constraint!(i8, i16, i32, i64, i128, isize, u8, u16, u32, u64, u128, usize, bool, char, String);

/// Decoration of a query entry.
pub enum Decoration<V: Constraint> {
    /// Never been active.
    Inactive,
    Active {
        id: Id,
        rule_idx: usize,
        /// `None` until the current rule initializes its matchings.
        matches: Option<ActiveMatches<V>>,
    },
}

impl<V: Constraint> Decoration<V> {
    pub fn is_active(&self) -> bool {
        matches!(self, Decoration::Active { .. })
    }
}

impl<V: Constraint> fmt::Debug for Decoration<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decoration::Inactive => f.write_str("Inactive"),
            Decoration::Active {
                id,
                rule_idx,
                matches,
            } => f
                .debug_struct("Active")
                .field("id", id)
                .field("rule_idx", rule_idx)
                .field("matches", matches)
                .finish(),
        }
    }
}

#[derive(Debug)]
pub struct QueryEntry<V: Constraint> {
    pub decoration: Decoration<V>,
    pub value: Arc<V>,
}

/// The execution state.
///
/// The query is kept as a vector whose last element is the top of the stack.
#[derive(Debug)]
pub struct State<V: Constraint> {
    query: Vec<QueryEntry<V>>,
    store: BTreeMap<Id, Arc<V>>,
    next_id: u64,
    index_rel: HashMap<V::Key, BTreeSet<Id>>,
}

impl<V: Constraint> Default for State<V> {
    fn default() -> Self {
        State {
            query: Vec::new(),
            store: BTreeMap::new(),
            next_id: 0,
            index_rel: HashMap::new(),
        }
    }
}

impl<V: Constraint> State<V> {
    /// Builds a state whose query holds `initial`, first element on top.
    pub fn new(initial: impl IntoIterator<Item = V>) -> Self {
        let mut state = State::default();
        state.push_query(initial);
        state
    }

    /// Pushes `values` so that the first of them ends up on top.
    pub fn push_query(&mut self, values: impl IntoIterator<Item = V>) {
        let values: Vec<V> = values.into_iter().collect();
        self.query.reserve(values.len());
        for value in values.into_iter().rev() {
            self.query.push(QueryEntry {
                decoration: Decoration::Inactive,
                value: Arc::new(value),
            });
        }
    }

    pub fn pop_query(&mut self) -> Result<QueryEntry<V>, StateError> {
        self.query.pop().ok_or(StateError::EmptyQuery)
    }

    /// Moves the top of the query into the store under a fresh identifier
    /// and registers its index key, if it has one.
    pub fn activate(&mut self) -> Result<Id, StateError> {
        let top = self.query.last_mut().ok_or(StateError::EmptyQuery)?;
        if top.decoration.is_active() {
            return Err(StateError::AlreadyActive);
        }
        let id = Id(self.next_id);
        self.next_id += 1;
        top.decoration = Decoration::Active {
            id,
            rule_idx: 0,
            matches: None,
        };
        let value = Arc::clone(&top.value);
        if let Some(key) = value.index() {
            self.index_rel.entry(key).or_default().insert(id);
        }
        self.store.insert(id, value);
        Ok(id)
    }

    /// Removes the given identifiers from the store and drops their entries
    /// from the index relation. Every id must be alive; on error nothing is
    /// removed.
    pub fn remove(&mut self, ids: &[Id]) -> Result<(), StateError> {
        for (k, id) in ids.iter().enumerate() {
            if !self.store.contains_key(id) || ids[..k].contains(id) {
                return Err(StateError::UnknownId(*id));
            }
        }
        for id in ids {
            let value = self.store.remove(id).expect("checked above");
            if let Some(key) = value.index() {
                if let Some(set) = self.index_rel.get_mut(&key) {
                    set.remove(id);
                    if set.is_empty() {
                        self.index_rel.remove(&key);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn alive(&self, id: Id) -> bool {
        self.store.contains_key(&id)
    }

    pub fn lookup(&self, id: Id) -> Option<&V> {
        self.store.get(&id).map(|v| &**v)
    }

    pub(crate) fn lookup_shared(&self, id: Id) -> Option<&Arc<V>> {
        self.store.get(&id)
    }

    /// All ids registered under `key`, in ascending order.
    pub fn index_lookup(&self, key: &V::Key) -> Vec<Id> {
        self.index_rel
            .get(key)
            .map(|set| set.iter().copied().collect())
            .unwrap_or_default()
    }

    pub(crate) fn index_set(&self, key: &V::Key) -> Option<&BTreeSet<Id>> {
        self.index_rel.get(key)
    }

    pub fn index_contains(&self, key: &V::Key, id: Id) -> bool {
        self.index_rel.get(key).is_some_and(|set| set.contains(&id))
    }

    /// Rule index and matchings of the active value.
    pub fn active_iterator(&self) -> Result<(usize, Option<&ActiveMatches<V>>), StateError> {
        match self.query.last() {
            None => Err(StateError::EmptyQuery),
            Some(QueryEntry {
                decoration:
                    Decoration::Active {
                        rule_idx, matches, ..
                    },
                ..
            }) => Ok((*rule_idx, matches.as_ref())),
            Some(_) => Err(StateError::NotActive),
        }
    }

    /// Takes the active iterator out of the top entry, leaving it
    /// uninitialized.
    pub fn take_active_iterator(&mut self) -> Result<(usize, Option<ActiveMatches<V>>), StateError> {
        match self.query.last_mut() {
            None => Err(StateError::EmptyQuery),
            Some(QueryEntry {
                decoration:
                    Decoration::Active {
                        rule_idx, matches, ..
                    },
                ..
            }) => Ok((*rule_idx, matches.take())),
            Some(_) => Err(StateError::NotActive),
        }
    }

    pub fn set_active_iterator(
        &mut self,
        rule_idx: usize,
        matches: Option<ActiveMatches<V>>,
    ) -> Result<(), StateError> {
        match self.query.last_mut() {
            None => Err(StateError::EmptyQuery),
            Some(QueryEntry {
                decoration:
                    Decoration::Active {
                        rule_idx: r,
                        matches: m,
                        ..
                    },
                ..
            }) => {
                *r = rule_idx;
                *m = matches;
                Ok(())
            }
            Some(_) => Err(StateError::NotActive),
        }
    }

    pub fn query(&self) -> &[QueryEntry<V>] {
        &self.query
    }

    pub fn query_top(&self) -> Option<&QueryEntry<V>> {
        self.query.last()
    }

    /// Query values from top to bottom.
    pub fn query_values(&self) -> impl Iterator<Item = &V> {
        self.query.iter().rev().map(|e| &*e.value)
    }

    pub fn query_len(&self) -> usize {
        self.query.len()
    }

    pub fn is_final(&self) -> bool {
        self.query.is_empty()
    }

    /// Store entries in ascending id order.
    pub fn store(&self) -> impl DoubleEndedIterator<Item = (Id, &V)> + '_ {
        self.store.iter().map(|(id, v)| (*id, &**v))
    }

    pub(crate) fn store_map(&self) -> &BTreeMap<Id, Arc<V>> {
        &self.store
    }

    pub fn store_len(&self) -> usize {
        self.store.len()
    }

    pub fn next_id(&self) -> Id {
        Id(self.next_id)
    }

    /// The index relation as sorted `(key, id)` pairs grouped by key.
    pub fn index_relation(&self) -> impl Iterator<Item = (&V::Key, Id)> {
        self.index_rel
            .iter()
            .flat_map(|(k, ids)| ids.iter().map(move |id| (k, *id)))
    }

    /// Store values in id order, consuming the state.
    pub fn into_store_values(self) -> Vec<Arc<V>> {
        self.store.into_values().collect()
    }

    /// Checks the structural invariants, returning a description of the
    /// first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let Some((&last, _)) = self.store.last_key_value() {
            if last.0 >= self.next_id {
                return Err(format!("store id {last} is not below next id {}", self.next_id));
            }
        }
        for entry in &self.query {
            if let Decoration::Active { id, .. } = entry.decoration {
                if id.0 >= self.next_id {
                    return Err(format!("active id {id} is not below next id {}", self.next_id));
                }
            }
        }
        let mut rebuilt: HashMap<V::Key, BTreeSet<Id>> = HashMap::new();
        for (id, value) in &self.store {
            if let Some(key) = value.index() {
                rebuilt.entry(key).or_default().insert(*id);
            }
        }
        if rebuilt != self.index_rel {
            return Err(format!(
                "index relation {:?} differs from rebuilt {:?}",
                self.index_rel, rebuilt
            ));
        }
        Ok(())
    }
}
