//! Embedding server programs into `{KPlus, Plus, Pure, Bind}` plus the
//! network, memory and failure effects.
//!
//! Expressions are effect-free except for reads, which become memory `get`
//! calls in continuation-passing style. The loop variable of `FOR` and
//! `OneOf` holds a pointer (list name and index); `y->f` reads and writes
//! go through the structured reference `(list xs i f)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use super::{Expr, NetOp, Place, Stmt};
use crate::error::EmbedError;
use crate::term::{Continuation, EffectOp, EffectSig, NodeKind, Term, Vocabulary};
use crate::value::{same_type, FiniteType, TypeRef, Value};

pub const NETWORK_EFF: &str = "NetworkEff";
pub const MEMORY_EFF: &str = "MemoryEff";
pub const FAIL_EFF: &str = "FailEff";

const STATES: [&str; 3] = ["READING", "WRITING", "CLOSED"];

type K<'a> = dyn Fn(Value) -> Result<Term, EmbedError> + 'a;

/// Types and vocabulary for a server with up to `capacity` connections.
pub struct ServerLang {
    vocab: Vocabulary,
    nat: TypeRef,
    state: TypeRef,
    conn: TypeRef,
    list: TypeRef,
    ptr: TypeRef,
    capacity: usize,
    vars: BTreeMap<String, TypeRef>,
    cache: Mutex<HashMap<String, Term>>,
}

impl ServerLang {
    /// Ids range over `0..=max_id`; `conns` holds at most `capacity`
    /// connections.
    pub fn new(max_id: u32, capacity: usize) -> Self {
        let nat = FiniteType::nat(max_id.max(2));
        let state = FiniteType::symbols("state", &STATES);
        let conn_values: Vec<Value> = nat
            .carrier()
            .iter()
            .flat_map(|id| {
                state
                    .carrier()
                    .iter()
                    .map(move |st| Value::record([("id", id.clone()), ("state", st.clone())]))
            })
            .collect();
        let conn = FiniteType::new("conn", conn_values).expect("distinct records");
        let list = FiniteType::list(&conn, capacity);
        let ptr = FiniteType::new(
            "ptr",
            (0..capacity as u32)
                .map(|i| Value::record([("list", Value::sym("conns")), ("index", Value::Nat(i))]))
                .collect(),
        )
        .expect("distinct pointers");
        let unit = FiniteType::unit();
        let network = EffectSig::new(
            NETWORK_EFF,
            vec![
                EffectOp::fixed("accept", vec![], nat.clone()),
                EffectOp::fixed("read", vec![nat.clone()], nat.clone()),
                EffectOp::fixed("write", vec![nat.clone(), nat.clone()], nat.clone()),
            ],
        )
        .expect("distinct operations");
        let memory = EffectSig::new(
            MEMORY_EFF,
            vec![
                EffectOp::polymorphic("get"),
                EffectOp::polymorphic("set"),
                EffectOp::polymorphic("append"),
            ],
        )
        .expect("distinct operations");
        let fail = EffectSig::new(FAIL_EFF, vec![EffectOp::fixed("fail", vec![], unit)]).expect("one operation");
        let vocab = Vocabulary::of(&[NodeKind::KPlus, NodeKind::Plus, NodeKind::Pure, NodeKind::Bind])
            .with_effect(network)
            .and_then(|v| v.with_effect(memory))
            .and_then(|v| v.with_effect(fail))
            .expect("distinct effects");
        let vars = [
            ("newconn", nat.clone()),
            ("r", nat.clone()),
            ("s", nat.clone()),
            ("newconn_rec", conn.clone()),
            ("conns", list.clone()),
            ("y", ptr.clone()),
        ]
        .into_iter()
        .map(|(k, t)| (k.to_string(), t))
        .collect();
        ServerLang {
            vocab,
            nat,
            state,
            conn,
            list,
            ptr,
            capacity,
            vars,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn nat(&self) -> &TypeRef {
        &self.nat
    }

    pub fn conn_type(&self) -> &TypeRef {
        &self.conn
    }

    pub fn list_type(&self) -> &TypeRef {
        &self.list
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Declared variables and their types.
    pub fn vars(&self) -> &BTreeMap<String, TypeRef> {
        &self.vars
    }

    pub fn pointer(&self, i: usize) -> Value {
        Value::record([("list", Value::sym("conns")), ("index", Value::Nat(i as u32))])
    }

    pub fn connection(&self, id: u32, state: &str) -> Value {
        Value::record([("id", Value::Nat(id)), ("state", Value::sym(state))])
    }

    fn var_type(&self, x: &str) -> Result<&TypeRef, EmbedError> {
        self.vars.get(x).ok_or_else(|| EmbedError::Scope(x.into()))
    }

    fn pointer_var(&self, y: &str) -> Result<(), EmbedError> {
        if Arc::ptr_eq(self.var_type(y)?, &self.ptr) {
            Ok(())
        } else {
            Err(EmbedError::Type(format!("{y} is not a pointer")))
        }
    }

    fn list_var(&self, xs: &str) -> Result<(), EmbedError> {
        if Arc::ptr_eq(self.var_type(xs)?, &self.list) {
            Ok(())
        } else {
            Err(EmbedError::Type(format!("{xs} is not a connection list")))
        }
    }

    fn field_type(&self, f: &str) -> Result<&TypeRef, EmbedError> {
        match f {
            "id" => Ok(&self.nat),
            "state" => Ok(&self.state),
            _ => Err(EmbedError::Scope(format!("field {f}"))),
        }
    }

    fn unit(&self) -> Term {
        self.vocab.pure(&FiniteType::unit(), Value::Unit).expect("unit value")
    }

    fn mem(&self, op: &str, args: Vec<Value>, ty: &TypeRef) -> Result<Term, EmbedError> {
        Ok(self.vocab.effect_typed(MEMORY_EFF, op, args, ty)?)
    }

    fn get(&self, r: Value, ty: &TypeRef) -> Result<Term, EmbedError> {
        self.mem("get", vec![r], ty)
    }

    fn set(&self, r: Value, v: Value) -> Result<Term, EmbedError> {
        self.mem("set", vec![r, v], &FiniteType::unit())
    }

    /// `m >>= k` with `k` tabulated over `m`'s carrier.
    fn bind_each(&self, m: Term, k: &K) -> Result<Term, EmbedError> {
        let mut table = BTreeMap::new();
        for v in m.ty().carrier() {
            table.insert(v.clone(), k(v.clone())?);
        }
        let result = table
            .values()
            .next()
            .map(|t: &Term| t.ty().clone())
            .ok_or_else(|| EmbedError::Type(format!("empty type {}", m.ty().name())))?;
        Ok(self.vocab.bind(&m, Continuation::Table(Arc::new(table)), &result)?)
    }

    fn seq(&self, a: &Term, b: &Term) -> Result<Term, EmbedError> {
        Ok(self.vocab.seq(a, b)?)
    }

    fn field_ref(ptr: &Value, f: &str) -> Result<Value, EmbedError> {
        match (ptr.field("list"), ptr.field("index")) {
            (Some(l), Some(i)) => Ok(Value::List(vec![l.clone(), i.clone(), Value::sym(f)])),
            _ => Err(EmbedError::Type(format!("{ptr} is not a pointer"))),
        }
    }

    fn type_of(&self, e: &Expr) -> Result<TypeRef, EmbedError> {
        Ok(match e {
            Expr::Nat(_) => self.nat.clone(),
            Expr::Bool(_) | Expr::Eq(..) | Expr::Not(_) => FiniteType::bool(),
            Expr::State(_) => self.state.clone(),
            Expr::Var(x) | Expr::Deref(x) => self.var_type(x)?.clone(),
            Expr::Field(_, f) => self.field_type(f)?.clone(),
            Expr::Conn(..) => self.conn.clone(),
        })
    }

    /// Evaluates `e`, passing its value to `k`.
    fn eval(&self, e: &Expr, k: &K) -> Result<Term, EmbedError> {
        match e {
            Expr::Nat(n) => {
                let v = Value::Nat(*n);
                if !self.nat.contains(&v) {
                    return Err(EmbedError::Type(format!("{n} exceeds {}", self.nat.name())));
                }
                k(v)
            }
            Expr::Bool(b) => k(Value::Bool(*b)),
            Expr::State(s) => k(Value::sym(s)),
            Expr::Var(x) | Expr::Deref(x) => {
                let ty = self.var_type(x)?;
                self.bind_each(self.get(Value::sym(x), ty)?, k)
            }
            Expr::Field(y, f) => {
                self.pointer_var(y)?;
                let fty = self.field_type(f)?;
                self.bind_each(self.get(Value::sym(y), &self.ptr)?, &|p| {
                    self.bind_each(self.get(Self::field_ref(&p, f)?, fty)?, k)
                })
            }
            Expr::Eq(a, b) => self.eval(a, &|x| self.eval(b, &|y| k(Value::Bool(x == y)))),
            Expr::Not(a) => {
                if !same_type(&self.type_of(a)?, &FiniteType::bool()) {
                    return Err(EmbedError::Type("not expects a boolean".into()));
                }
                self.eval(a, &|x| k(Value::Bool(x != Value::Bool(true))))
            }
            Expr::Conn(a, b) => self.eval(a, &|id| {
                self.eval(b, &|st| {
                    let c = Value::record([("id", id.clone()), ("state", st)]);
                    if !self.conn.contains(&c) {
                        return Err(EmbedError::Type(format!("{c} is not a connection")));
                    }
                    k(c)
                })
            }),
        }
    }

    fn assign(&self, p: &Place, v: Value) -> Result<Term, EmbedError> {
        match p {
            Place::Var(x) => {
                let ty = self.var_type(x)?;
                if !ty.contains(&v) {
                    return Err(EmbedError::Type(format!("{v} does not fit {x} : {}", ty.name())));
                }
                self.set(Value::sym(x), v)
            }
            Place::Field(y, f) => {
                self.pointer_var(y)?;
                if !self.field_type(f)?.contains(&v) {
                    return Err(EmbedError::Type(format!("{v} does not fit field {f}")));
                }
                self.bind_each(self.get(Value::sym(y), &self.ptr)?, &|ptr| {
                    self.set(Self::field_ref(&ptr, f)?, v.clone())
                })
            }
        }
    }

    fn net(&self, op: &str, args: Vec<Value>) -> Result<Term, EmbedError> {
        Ok(self.vocab.effect(NETWORK_EFF, op, args)?)
    }

    /// `seq(set y ptr_0, body) ;; … ;; seq(set y ptr_{n-1}, body)`, joined
    /// by `join` and ended by `pure tt`.
    fn per_element(
        &self,
        y: &str,
        body: &Term,
        n: usize,
        join: &dyn Fn(&Term, &Term) -> Result<Term, EmbedError>,
    ) -> Result<Term, EmbedError> {
        let mut acc = self.unit();
        for i in (0..n).rev() {
            let visit = self.seq(&self.set(Value::sym(y), self.pointer(i))?, body)?;
            acc = join(&visit, &acc)?;
        }
        Ok(acc)
    }

    /// `get xs >>= (fun l => f (length l))`, sharing one term per length.
    fn over_list(&self, xs: &str, f: &dyn Fn(usize) -> Result<Term, EmbedError>) -> Result<Term, EmbedError> {
        self.list_var(xs)?;
        let by_len: Vec<Term> = (0..=self.capacity).map(f).collect::<Result<_, _>>()?;
        self.bind_each(self.get(Value::sym(xs), &self.list)?, &|l| match l {
            Value::List(items) => Ok(by_len[items.len()].clone()),
            other => Err(EmbedError::Type(format!("{other} is not a list"))),
        })
    }

    /// The term of a statement. Equal statements share one term.
    pub fn embed(&self, s: &Stmt) -> Result<Term, EmbedError> {
        let key = format!("{s:?}");
        if let Some(t) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(t.clone());
        }
        let t = self.embed_uncached(s)?;
        self.cache.lock().expect("cache lock").insert(key, t.clone());
        Ok(t)
    }

    fn embed_uncached(&self, s: &Stmt) -> Result<Term, EmbedError> {
        match s {
            Stmt::EffAssign(p, op) => match op {
                NetOp::Accept => self.bind_each(self.net("accept", vec![])?, &|v| self.assign(p, v)),
                NetOp::Read(a) => self.eval(a, &|id| self.bind_each(self.net("read", vec![id])?, &|v| self.assign(p, v))),
                NetOp::Write(a, b) => self.eval(a, &|id| {
                    self.eval(b, &|x| self.bind_each(self.net("write", vec![id.clone(), x])?, &|v| self.assign(p, v)))
                }),
            },
            Stmt::Assign(p, e) => self.eval(e, &|v| self.assign(p, v)),
            Stmt::Append(xs, e) => {
                self.list_var(xs)?;
                self.eval(e, &|v| self.mem("append", vec![Value::sym(xs), v], &FiniteType::unit()))
            }
            Stmt::If(c, t, e) => {
                let (t, e) = (
                    self.embed(t)?,
                    match e {
                        Some(e) => self.embed(e)?,
                        None => self.unit(),
                    },
                );
                let b = FiniteType::bool();
                let cond = self.eval(c, &|v| Ok(self.vocab.pure(&b, v)?))?;
                self.bind_each(cond, &|v| Ok(if v == Value::Bool(true) { t.clone() } else { e.clone() }))
            }
            Stmt::For(y, xs, body) => {
                self.pointer_var(y)?;
                let body = self.embed(body)?;
                self.over_list(xs, &|n| self.per_element(y, &body, n, &|a, b| self.seq(a, b)))
            }
            Stmt::Seq(a, b) => self.seq(&self.embed(a)?, &self.embed(b)?),
            Stmt::Some(c) => Ok(self.vocab.kplus(&self.embed(c)?)?),
            Stmt::Or(a, b) => Ok(self.vocab.kplus(&self.vocab.plus(&self.embed(a)?, &self.embed(b)?)?)?),
            Stmt::OneOf(xs, y, c) => {
                self.pointer_var(y)?;
                let body = self.embed(c)?;
                self.over_list(xs, &|n| {
                    let choice = self.per_element(y, &body, n, &|a, b| Ok(self.vocab.plus(a, b)?))?;
                    Ok(self.vocab.kplus(&choice)?)
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::parse_program;
    use crate::Node;

    fn lang() -> ServerLang {
        ServerLang::new(2, 3)
    }

    #[test]
    fn sequencing_is_bind() {
        let l = lang();
        let t = l.embed(&parse_program("r ::= 1 ;; s ::= 2").unwrap().body).unwrap();
        let Node::Bind { m, k } = t.node() else { panic!("{t}") };
        assert_eq!(m.to_string(), "(effect MemoryEff set r 1 : unit)");
        assert_eq!(k.apply(&Value::Unit).unwrap().to_string(), "(effect MemoryEff set s 2 : unit)");
    }

    #[test]
    fn some_and_or_are_kplus() {
        let l = lang();
        let c = parse_program("r ::= 1").unwrap().body;
        let some = l.embed(&Stmt::Some(Box::new(c.clone()))).unwrap();
        assert_eq!(some, l.vocab().kplus(&l.embed(&c).unwrap()).unwrap());
        let or = l.embed(&Stmt::Or(Box::new(c.clone()), Box::new(c.clone()))).unwrap();
        assert!(matches!(or.node(), Node::KPlus(p) if matches!(p.node(), Node::Plus(..))));
    }

    #[test]
    fn one_of_empty_list_is_kplus_pure() {
        let l = lang();
        let t = l.embed(&parse_program("OneOf (conns) y (r ::= 1)").unwrap().body).unwrap();
        let Node::Bind { k, .. } = t.node() else { panic!() };
        let empty = k.apply(&Value::List(vec![])).unwrap();
        assert_eq!(empty, l.vocab().kplus(&l.unit()).unwrap());
    }

    #[test]
    fn scope_and_type_errors() {
        let l = lang();
        assert_eq!(
            l.embed(&parse_program("q ::= 1").unwrap().body),
            Err(EmbedError::Scope("q".into()))
        );
        assert!(matches!(l.embed(&parse_program("r ::= 9").unwrap().body), Err(EmbedError::Type(_))));
        assert!(matches!(l.embed(&parse_program("FOR r IN conns DO s ::= 1 END").unwrap().body), Err(EmbedError::Type(_))));
    }
}
