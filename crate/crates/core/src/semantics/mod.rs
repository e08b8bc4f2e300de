//! Semantic domains: trace sets (the reference oracle), the powerset
//! transformer, and the reader and update domains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::SemError;
use crate::value::Value;

mod domain;
mod lemma;
mod trace;

pub use lemma::{associativity_counterexample, Counterexample, TICK_EFF};
pub use domain::{interpret, reader, update, Cost, Env, ReaderVal, UpdateVal};
pub use trace::{
    for_each_behavior, oracle_equiv, oracle_refines, powerset_interpret, refinement_witness,
    trace_sem, Membership,
};

/// One observable effect occurrence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub sig: String,
    pub op: String,
    pub args: Vec<Value>,
    pub outcome: Value,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}(", self.sig, self.op)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")={}", self.outcome)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Behavior {
    pub trace: Vec<Event>,
    pub result: Value,
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.trace.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "] => {}", self.result)
    }
}

/// A finite, duplicate-free set of behaviors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceSet {
    behaviors: BTreeSet<Behavior>,
}

impl TraceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, b: Behavior) -> bool {
        self.behaviors.insert(b)
    }

    pub fn contains(&self, b: &Behavior) -> bool {
        self.behaviors.contains(b)
    }

    pub fn len(&self) -> usize {
        self.behaviors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.behaviors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Behavior> {
        self.behaviors.iter()
    }

    pub fn is_subset(&self, other: &TraceSet) -> bool {
        self.behaviors.is_subset(&other.behaviors)
    }

    pub fn union(&self, other: &TraceSet) -> TraceSet {
        TraceSet {
            behaviors: self.behaviors.union(&other.behaviors).cloned().collect(),
        }
    }

    /// One behavior per line, sorted.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for b in &self.behaviors {
            out.push_str(&b.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromIterator<Behavior> for TraceSet {
    fn from_iter<I: IntoIterator<Item = Behavior>>(iter: I) -> Self {
        TraceSet {
            behaviors: iter.into_iter().collect(),
        }
    }
}

/// Memory contents: variable name to value.
pub type Store = Arc<BTreeMap<String, Value>>;

/// How effect calls are resolved during trace enumeration.
///
/// Operations without an explicit outcome list enumerate their whole result
/// carrier, independently at every call. The memory effect, if named, is
/// interpreted deterministically against a store.
#[derive(Clone, Debug, Default)]
pub struct OutcomeModel {
    outcomes: BTreeMap<(String, String), Vec<Value>>,
    memory: Option<String>,
    observe_memory: bool,
    initial_store: BTreeMap<String, Value>,
}

impl OutcomeModel {
    /// Every call enumerates its result carrier.
    pub fn fresh() -> Self {
        Self::default()
    }

    pub fn with_outcomes(mut self, sig: &str, op: &str, outcomes: Vec<Value>) -> Self {
        self.outcomes.insert((sig.into(), op.into()), outcomes);
        self
    }

    /// Interprets effect `sig` as memory with `get`, `set` and `append`.
    pub fn with_memory(mut self, sig: &str) -> Self {
        self.memory = Some(sig.into());
        self
    }

    /// Records memory operations in traces (off by default).
    pub fn observe_memory(mut self, yes: bool) -> Self {
        self.observe_memory = yes;
        self
    }

    pub fn with_store(mut self, store: BTreeMap<String, Value>) -> Self {
        self.initial_store = store;
        self
    }

    pub fn initial_store(&self) -> Store {
        Arc::new(self.initial_store.clone())
    }

    pub(crate) fn outcomes(&self, sig: &str, op: &str) -> Option<&[Value]> {
        self.outcomes
            .get(&(sig.to_string(), op.to_string()))
            .map(Vec::as_slice)
    }

    pub(crate) fn is_memory(&self, sig: &str) -> bool {
        self.memory.as_deref() == Some(sig)
    }

    pub(crate) fn memory_observable(&self) -> bool {
        self.observe_memory
    }
}

/// A memory reference: a variable symbol, or `(list var index field)` for a
/// field of a record stored in a list variable.
pub(crate) fn mem_get(store: &BTreeMap<String, Value>, r: &Value) -> Result<Value, SemError> {
    match r {
        Value::Sym(x) => store
            .get(x)
            .cloned()
            .ok_or_else(|| SemError::UnboundVar(x.clone())),
        Value::List(path) => match path.as_slice() {
            [Value::Sym(x), Value::Nat(i), Value::Sym(field)] => {
                let list = store.get(x).ok_or_else(|| SemError::UnboundVar(x.clone()))?;
                let Value::List(items) = list else {
                    return Err(SemError::Memory(format!("{x} is not a list")));
                };
                items
                    .get(*i as usize)
                    .and_then(|rec| rec.field(field))
                    .cloned()
                    .ok_or_else(|| SemError::Memory(format!("{x}[{i}].{field} does not exist")))
            }
            _ => Err(SemError::Memory(format!("bad reference {r}"))),
        },
        _ => Err(SemError::Memory(format!("bad reference {r}"))),
    }
}

pub(crate) fn mem_set(store: &mut BTreeMap<String, Value>, r: &Value, v: Value) -> Result<(), SemError> {
    match r {
        Value::Sym(x) => {
            store.insert(x.clone(), v);
            Ok(())
        }
        Value::List(path) => match path.as_slice() {
            [Value::Sym(x), Value::Nat(i), Value::Sym(field)] => {
                let slot = store
                    .get_mut(x)
                    .and_then(|l| match l {
                        Value::List(items) => items.get_mut(*i as usize),
                        _ => None,
                    })
                    .and_then(|rec| match rec {
                        Value::Record(fields) => fields.get_mut(field),
                        _ => None,
                    })
                    .ok_or_else(|| SemError::Memory(format!("{x}[{i}].{field} does not exist")))?;
                *slot = v;
                Ok(())
            }
            _ => Err(SemError::Memory(format!("bad reference {r}"))),
        },
        _ => Err(SemError::Memory(format!("bad reference {r}"))),
    }
}

pub(crate) fn mem_append(store: &mut BTreeMap<String, Value>, r: &Value, v: Value) -> Result<(), SemError> {
    let Value::Sym(x) = r else {
        return Err(SemError::Memory(format!("cannot append to {r}")));
    };
    match store.get_mut(x) {
        Some(Value::List(items)) => {
            items.push(v);
            Ok(())
        }
        Some(_) => Err(SemError::Memory(format!("{x} is not a list"))),
        None => Err(SemError::UnboundVar(x.clone())),
    }
}
