//! Host functions embedded shallowly in terms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::TermError;
use crate::value::{for_each_assignment, same_type, FiniteType, TypeRef, Value};

type HostFn = dyn Fn(&[Value]) -> Value + Send + Sync;

#[derive(Clone)]
pub enum FnBody {
    /// Total table over the domain product.
    Table(Arc<BTreeMap<Vec<Value>, Value>>),
    /// Host evaluator; interpreters may call it, the derivation checker may not.
    Opaque(Arc<HostFn>),
}

/// A named function `domain -> codomain`.
#[derive(Clone)]
pub struct Func {
    name: String,
    domain: Vec<TypeRef>,
    codomain: TypeRef,
    body: FnBody,
}

pub type FnRef = Arc<Func>;

impl Func {
    /// Tabulates `f` over the full domain product.
    pub fn tabulate(
        name: impl Into<String>,
        domain: Vec<TypeRef>,
        codomain: TypeRef,
        f: impl Fn(&[Value]) -> Value,
    ) -> Result<FnRef, TermError> {
        let name = name.into();
        let mut table = BTreeMap::new();
        for_each_assignment(&domain, |args| {
            let out = f(args);
            if !codomain.contains(&out) {
                return Err(TermError::TypeMismatch(format!(
                    "function {name} maps {args:?} to {out}, outside {codomain}"
                )));
            }
            table.insert(args.to_vec(), out);
            Ok(())
        })?;
        Ok(Arc::new(Func {
            name,
            domain,
            codomain,
            body: FnBody::Table(Arc::new(table)),
        }))
    }

    /// Builds a function from an explicit table, which must cover the domain exactly.
    pub fn from_table(
        name: impl Into<String>,
        domain: Vec<TypeRef>,
        codomain: TypeRef,
        table: BTreeMap<Vec<Value>, Value>,
    ) -> Result<FnRef, TermError> {
        let name = name.into();
        let mut expected = 0usize;
        for_each_assignment(&domain, |args| {
            expected += 1;
            match table.get(args) {
                Some(v) if codomain.contains(v) => Ok(()),
                Some(v) => Err(TermError::TypeMismatch(format!(
                    "function {name} maps {args:?} to {v}, outside {codomain}"
                ))),
                None => Err(TermError::IncompleteTable {
                    name: name.clone(),
                    missing: args.to_vec(),
                }),
            }
        })?;
        if table.len() != expected {
            return Err(TermError::TypeMismatch(format!(
                "function {name} has entries outside its domain"
            )));
        }
        Ok(Arc::new(Func {
            name,
            domain,
            codomain,
            body: FnBody::Table(Arc::new(table)),
        }))
    }

    pub fn opaque(
        name: impl Into<String>,
        domain: Vec<TypeRef>,
        codomain: TypeRef,
        f: impl Fn(&[Value]) -> Value + Send + Sync + 'static,
    ) -> FnRef {
        Arc::new(Func {
            name: name.into(),
            domain,
            codomain,
            body: FnBody::Opaque(Arc::new(f)),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[TypeRef] {
        &self.domain
    }

    pub fn codomain(&self) -> &TypeRef {
        &self.codomain
    }

    pub fn body(&self) -> &FnBody {
        &self.body
    }

    pub fn is_table(&self) -> bool {
        matches!(self.body, FnBody::Table(_))
    }

    /// Evaluates the function. Table lookups outside the domain return `None`.
    pub fn apply(&self, args: &[Value]) -> Option<Value> {
        match &self.body {
            FnBody::Table(t) => t.get(args).cloned(),
            FnBody::Opaque(f) => Some(f(args)),
        }
    }

    /// Evaluates through the table only.
    pub fn apply_table(&self, args: &[Value]) -> Result<Option<Value>, TermError> {
        match &self.body {
            FnBody::Table(t) => Ok(t.get(args).cloned()),
            FnBody::Opaque(_) => Err(TermError::OpaqueFunction(self.name.clone())),
        }
    }

    pub fn arity(&self) -> usize {
        self.domain.len()
    }

    /// `flip f` for a binary `f`, named `flip.<f>`.
    pub fn flip(f: &FnRef) -> Result<FnRef, TermError> {
        if f.arity() != 2 {
            return Err(TermError::TypeMismatch(format!("flip of non-binary {}", f.name)));
        }
        let name = match f.name.strip_prefix("flip.") {
            Some(inner) => inner.to_string(),
            None => format!("flip.{}", f.name),
        };
        let g = f.clone();
        let domain = vec![f.domain[1].clone(), f.domain[0].clone()];
        match &f.body {
            FnBody::Table(_) => Func::tabulate(name, domain, f.codomain.clone(), move |a| {
                g.apply(&[a[1].clone(), a[0].clone()])
                    .expect("table covers domain")
            }),
            FnBody::Opaque(_) => Ok(Func::opaque(name, domain, f.codomain.clone(), move |a| {
                g.apply(&[a[1].clone(), a[0].clone()])
                    .expect("opaque is total")
            })),
        }
    }
}

impl PartialEq for Func {
    fn eq(&self, other: &Self) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        if self.name != other.name
            || self.domain.len() != other.domain.len()
            || !same_type(&self.codomain, &other.codomain)
            || !self
                .domain
                .iter()
                .zip(&other.domain)
                .all(|(a, b)| same_type(a, b))
        {
            return false;
        }
        match (&self.body, &other.body) {
            (FnBody::Table(a), FnBody::Table(b)) => Arc::ptr_eq(a, b) || a == b,
            (FnBody::Opaque(a), FnBody::Opaque(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Eq for Func {}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Commonly used functions over the standard types.
pub mod stdlib {
    use super::*;

    fn bool_op(name: &str, op: fn(bool, bool) -> bool) -> FnRef {
        let b = FiniteType::bool();
        Func::tabulate(name, vec![b.clone(), b.clone()], b, move |a| {
            Value::Bool(op(a[0].as_bool().unwrap(), a[1].as_bool().unwrap()))
        })
        .expect("closed over bool")
    }

    pub fn andb() -> FnRef {
        bool_op("andb", |x, y| x && y)
    }

    pub fn orb() -> FnRef {
        bool_op("orb", |x, y| x || y)
    }

    pub fn negb() -> FnRef {
        let b = FiniteType::bool();
        Func::tabulate("negb", vec![b.clone()], b, |a| {
            Value::Bool(!a[0].as_bool().unwrap())
        })
        .expect("closed over bool")
    }

    /// `fun x _ => x`
    pub fn first(x: &TypeRef, y: &TypeRef) -> FnRef {
        Func::tabulate(
            format!("first[{x},{y}]"),
            vec![x.clone(), y.clone()],
            x.clone(),
            |a| a[0].clone(),
        )
        .expect("projection")
    }

    /// `fun _ y => y`
    pub fn second(x: &TypeRef, y: &TypeRef) -> FnRef {
        Func::tabulate(
            format!("second[{x},{y}]"),
            vec![x.clone(), y.clone()],
            y.clone(),
            |a| a[1].clone(),
        )
        .expect("projection")
    }

    pub fn pair(x: &TypeRef, y: &TypeRef) -> FnRef {
        Func::tabulate(
            format!("pair[{x},{y}]"),
            vec![x.clone(), y.clone()],
            FiniteType::product(x, y),
            |a| Value::pair(a[0].clone(), a[1].clone()),
        )
        .expect("pairing")
    }

    pub fn identity(x: &TypeRef) -> FnRef {
        Func::tabulate(format!("id[{x}]"), vec![x.clone()], x.clone(), |a| {
            a[0].clone()
        })
        .expect("identity")
    }

    pub fn inr(left: &TypeRef, right: &TypeRef) -> FnRef {
        Func::tabulate(
            format!("inr[{left},{right}]"),
            vec![right.clone()],
            FiniteType::either(left, right),
            |a| Value::Right(Box::new(a[0].clone())),
        )
        .expect("injection")
    }

    /// Function application `fun h x => h x` with `h : x -> r`.
    pub fn apply(x: &TypeRef, r: &TypeRef) -> FnRef {
        let h = FiniteType::function(x, r);
        Func::tabulate(
            format!("app[{x},{r}]"),
            vec![h, x.clone()],
            r.clone(),
            |a| a[0].call(&a[1]).cloned().expect("total function value"),
        )
        .expect("application")
    }

    /// Flipped application `fun x h => h x`.
    pub fn apply_flipped(x: &TypeRef, r: &TypeRef) -> FnRef {
        let h = FiniteType::function(x, r);
        Func::tabulate(
            format!("flipapp[{x},{r}]"),
            vec![x.clone(), h],
            r.clone(),
            |a| a[1].call(&a[0]).cloned().expect("total function value"),
        )
        .expect("application")
    }
}

#[cfg(test)]
mod tests {
    use super::stdlib::*;
    use super::*;

    #[test]
    fn tables_cover_domain() {
        let f = andb();
        assert_eq!(f.apply(&[Value::Bool(true), Value::Bool(false)]), Some(Value::Bool(false)));
        let b = FiniteType::bool();
        let mut t = BTreeMap::new();
        t.insert(vec![Value::Bool(true)], Value::Bool(true));
        assert!(matches!(
            Func::from_table("partial", vec![b.clone()], b, t),
            Err(TermError::IncompleteTable { .. })
        ));
    }

    #[test]
    fn flip_twice_restores_name_and_table() {
        let b = FiniteType::bool();
        let impl_ = Func::tabulate("implies", vec![b.clone(), b.clone()], b, |a| {
            Value::Bool(!a[0].as_bool().unwrap() || a[1].as_bool().unwrap())
        })
        .unwrap();
        let flipped = Func::flip(&impl_).unwrap();
        assert_eq!(flipped.name(), "flip.implies");
        assert_eq!(
            flipped.apply(&[Value::Bool(true), Value::Bool(false)]),
            Some(Value::Bool(true))
        );
        assert_eq!(*Func::flip(&flipped).unwrap(), *impl_);
    }

    #[test]
    fn opaque_functions_refuse_table_evaluation() {
        let b = FiniteType::bool();
        let f = Func::opaque("host", vec![b.clone()], b, |a| a[0].clone());
        assert!(matches!(
            f.apply_table(&[Value::Bool(true)]),
            Err(TermError::OpaqueFunction(_))
        ));
        assert_eq!(f.apply(&[Value::Bool(true)]), Some(Value::Bool(true)));
    }
}
