//! Values and the finite types that carry them.
//!
//! Every type that appears in a checked context is finite: side conditions of
//! theory rules and `Bind` continuations are decided by walking carriers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::TypeError;

/// A first-order value.
///
/// `Left`/`Right` encode tagged sums and `Map` encodes function values
/// (total tables), which `select` and the associativity law need.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Nat(u32),
    Sym(String),
    Record(BTreeMap<String, Value>),
    List(Vec<Value>),
    Left(Box<Value>),
    Right(Box<Value>),
    Map(BTreeMap<Value, Value>),
}

impl Value {
    pub fn sym(s: impl Into<String>) -> Self {
        Value::Sym(s.into())
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::List(vec![a, b])
    }

    pub fn record<I, K>(fields: I) -> Self
    where
        I: IntoIterator<Item = (K, Value)>,
        K: Into<String>,
    {
        Value::Record(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_nat(&self) -> Option<u32> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn field(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Record(fields) => fields.get(name),
            _ => None,
        }
    }

    /// Applies a function value (a `Map`) to an argument.
    pub fn call(&self, arg: &Value) -> Option<&Value> {
        match self {
            Value::Map(table) => table.get(arg),
            _ => None,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "tt"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Record(fields) => {
                write!(f, "(record")?;
                for (k, v) in fields {
                    write!(f, " ({k} {v})")?;
                }
                write!(f, ")")
            }
            Value::List(items) => {
                write!(f, "(list")?;
                for v in items {
                    write!(f, " {v}")?;
                }
                write!(f, ")")
            }
            Value::Left(v) => write!(f, "(inl {v})"),
            Value::Right(v) => write!(f, "(inr {v})"),
            Value::Map(table) => {
                write!(f, "(map")?;
                for (k, v) in table {
                    write!(f, " ({k} {v})")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A named finite type with a canonical carrier ordering.
#[derive(Clone)]
pub struct FiniteType {
    name: String,
    carrier: Vec<Value>,
    shape: Shape,
    members: BTreeSet<Value>,
}

impl PartialEq for FiniteType {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.name == other.name && self.shape == other.shape && self.carrier == other.carrier)
    }
}

impl Eq for FiniteType {}

impl std::hash::Hash for FiniteType {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.carrier.len().hash(state);
    }
}

/// How a type was built; lets constructors recover component types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Atomic,
    Sum(TypeRef, TypeRef),
    Product(TypeRef, TypeRef),
    Function(TypeRef, TypeRef),
    List(TypeRef, usize),
}

pub type TypeRef = Arc<FiniteType>;

/// Upper bound of the default bounded naturals (inclusive).
pub const DEFAULT_NAT_MAX: u32 = 7;

impl FiniteType {
    fn build(name: String, carrier: Vec<Value>, shape: Shape) -> TypeRef {
        let members = carrier.iter().cloned().collect();
        Arc::new(FiniteType {
            name,
            carrier,
            shape,
            members,
        })
    }

    pub fn new(name: impl Into<String>, carrier: Vec<Value>) -> Result<TypeRef, TypeError> {
        let name = name.into();
        if carrier.is_empty() {
            return Err(TypeError::EmptyCarrier(name));
        }
        let mut seen = BTreeSet::new();
        for v in &carrier {
            if !seen.insert(v) {
                return Err(TypeError::DuplicateCarrierValue {
                    ty: name,
                    value: v.clone(),
                });
            }
        }
        Ok(FiniteType::build(name, carrier, Shape::Atomic))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn carrier(&self) -> &[Value] {
        &self.carrier
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.members.contains(v)
    }

    pub fn unit() -> TypeRef {
        FiniteType::build("unit".into(), vec![Value::Unit], Shape::Atomic)
    }

    pub fn bool() -> TypeRef {
        FiniteType::build("bool".into(), vec![Value::Bool(false), Value::Bool(true)], Shape::Atomic)
    }

    /// Naturals `0..=max`, named `nat<max+1>`.
    pub fn nat(max: u32) -> TypeRef {
        FiniteType::build(format!("nat{}", max + 1), (0..=max).map(Value::Nat).collect(), Shape::Atomic)
    }

    pub fn default_nat() -> TypeRef {
        Self::nat(DEFAULT_NAT_MAX)
    }

    pub fn symbols(name: impl Into<String>, tags: &[&str]) -> TypeRef {
        FiniteType::build(name.into(), tags.iter().map(|t| Value::sym(*t)).collect(), Shape::Atomic)
    }

    pub fn either(left: &TypeRef, right: &TypeRef) -> TypeRef {
        let carrier = left
            .carrier
            .iter()
            .map(|v| Value::Left(Box::new(v.clone())))
            .chain(right.carrier.iter().map(|v| Value::Right(Box::new(v.clone()))))
            .collect();
        FiniteType::build(format!("({} + {})", left.name, right.name), carrier, Shape::Sum(left.clone(), right.clone()))
    }

    pub fn product(left: &TypeRef, right: &TypeRef) -> TypeRef {
        let mut carrier = Vec::with_capacity(left.len() * right.len());
        for a in &left.carrier {
            for b in &right.carrier {
                carrier.push(Value::pair(a.clone(), b.clone()));
            }
        }
        FiniteType::build(format!("({} * {})", left.name, right.name), carrier, Shape::Product(left.clone(), right.clone()))
    }

    /// All total function tables from `dom` to `cod`.
    pub fn function(dom: &TypeRef, cod: &TypeRef) -> TypeRef {
        let mut carrier = vec![BTreeMap::new()];
        for x in &dom.carrier {
            let mut next = Vec::with_capacity(carrier.len() * cod.len());
            for partial in &carrier {
                for y in &cod.carrier {
                    let mut m = partial.clone();
                    m.insert(x.clone(), y.clone());
                    next.push(m);
                }
            }
            carrier = next;
        }
        FiniteType::build(format!("({} -> {})", dom.name, cod.name), carrier.into_iter().map(Value::Map).collect(), Shape::Function(dom.clone(), cod.clone()))
    }

    /// Lists of length `0..=max_len` over `elem`, shortest first.
    pub fn list(elem: &TypeRef, max_len: usize) -> TypeRef {
        let mut carrier = vec![Value::List(vec![])];
        let mut layer: Vec<Vec<Value>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * elem.len());
            for prefix in &layer {
                for e in &elem.carrier {
                    let mut l = prefix.clone();
                    l.push(e.clone());
                    next.push(l);
                }
            }
            carrier.extend(next.iter().cloned().map(Value::List));
            layer = next;
        }
        FiniteType::build(format!("(list {} {})", elem.name, max_len), carrier, Shape::List(elem.clone(), max_len))
    }

    /// If this is a sum type built by [`FiniteType::either`], its two halves.
    pub fn sum_parts(&self) -> Option<(Vec<Value>, Vec<Value>)> {
        let mut lefts = Vec::new();
        let mut rights = Vec::new();
        for v in &self.carrier {
            match v {
                Value::Left(x) => lefts.push((**x).clone()),
                Value::Right(x) => rights.push((**x).clone()),
                _ => return None,
            }
        }
        Some((lefts, rights))
    }
}

impl fmt::Debug for FiniteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl fmt::Display for FiniteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Same-type test with a pointer fast path.
pub fn same_type(a: &TypeRef, b: &TypeRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Calls `visit` on every tuple of the product of `types`, in canonical order.
/// Stops early and returns the first `Err`.
pub fn for_each_assignment<E>(
    types: &[TypeRef],
    mut visit: impl FnMut(&[Value]) -> Result<(), E>,
) -> Result<(), E> {
    let mut idx = vec![0usize; types.len()];
    let mut current: Vec<Value> = types.iter().map(|t| t.carrier[0].clone()).collect();
    loop {
        visit(&current)?;
        let mut pos = types.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < types[pos].len() {
                current[pos] = types[pos].carrier[idx[pos]].clone();
                break;
            }
            idx[pos] = 0;
            current[pos] = types[pos].carrier[0].clone();
        }
    }
}
