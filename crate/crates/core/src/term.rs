//! Effect signatures, adverb node kinds, vocabularies, and terms.
//!
//! A [`Term`] is a finite tree whose inner nodes are reified functor-class
//! operations and whose leaves are `Pure` values or effect calls. Terms are
//! never normalized: constructors store their arguments as given.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::TermError;
use crate::func::{stdlib, FnRef, Func};
use crate::value::{same_type, FiniteType, Shape, TypeRef, Value};

/// One operation of an effect signature. `None` argument or result types mean
/// the operation is polymorphic and the call site fixes them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectOp {
    pub name: String,
    pub args: Option<Vec<TypeRef>>,
    pub result: Option<TypeRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectSig {
    name: String,
    ops: Vec<EffectOp>,
}

impl EffectSig {
    pub fn new(name: impl Into<String>, ops: Vec<EffectOp>) -> Result<Arc<Self>, TermError> {
        let name = name.into();
        let mut seen = BTreeSet::new();
        for op in &ops {
            if !seen.insert(op.name.clone()) {
                return Err(TermError::TypeMismatch(format!(
                    "effect {name} declares operation {} twice",
                    op.name
                )));
            }
        }
        Ok(Arc::new(EffectSig { name, ops }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ops(&self) -> &[EffectOp] {
        &self.ops
    }

    pub fn op(&self, name: &str) -> Option<&EffectOp> {
        self.ops.iter().find(|o| o.name == name)
    }
}

impl EffectOp {
    pub fn fixed(name: &str, args: Vec<TypeRef>, result: TypeRef) -> Self {
        EffectOp {
            name: name.into(),
            args: Some(args),
            result: Some(result),
        }
    }

    pub fn polymorphic(name: &str) -> Self {
        EffectOp {
            name: name.into(),
            args: None,
            result: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Pure,
    FMap,
    LiftA2,
    SelectBy,
    Bind,
    KPlus,
    Plus,
    Effect(String),
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Pure => write!(f, "pure"),
            NodeKind::FMap => write!(f, "fmap"),
            NodeKind::LiftA2 => write!(f, "liftA2"),
            NodeKind::SelectBy => write!(f, "selectBy"),
            NodeKind::Bind => write!(f, "bind"),
            NodeKind::KPlus => write!(f, "kplus"),
            NodeKind::Plus => write!(f, "plus"),
            NodeKind::Effect(name) => write!(f, "effect {name}"),
        }
    }
}

/// The node kinds and effect signatures a term may use.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    kinds: BTreeSet<NodeKind>,
    effects: BTreeMap<String, Arc<EffectSig>>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(kinds: &[NodeKind]) -> Self {
        let mut v = Self::new();
        for k in kinds {
            assert!(
                !matches!(k, NodeKind::Effect(_)),
                "effects are added with with_effect"
            );
            v.kinds.insert(k.clone());
        }
        v
    }

    pub fn with(mut self, kind: NodeKind) -> Self {
        assert!(!matches!(kind, NodeKind::Effect(_)));
        self.kinds.insert(kind);
        self
    }

    pub fn with_effect(mut self, sig: Arc<EffectSig>) -> Result<Self, TermError> {
        self.add_effect(sig)?;
        Ok(self)
    }

    fn add_effect(&mut self, sig: Arc<EffectSig>) -> Result<(), TermError> {
        if let Some(existing) = self.effects.get(sig.name()) {
            if **existing != *sig {
                return Err(TermError::DuplicateEffectName(sig.name().into()));
            }
            return Ok(());
        }
        self.kinds.insert(NodeKind::Effect(sig.name().into()));
        self.effects.insert(sig.name().into(), sig);
        Ok(())
    }

    /// Set union of kinds; effects registered under one name must agree.
    pub fn union(&self, other: &Vocabulary) -> Result<Vocabulary, TermError> {
        let mut out = self.clone();
        for k in &other.kinds {
            if !matches!(k, NodeKind::Effect(_)) {
                out.kinds.insert(k.clone());
            }
        }
        for sig in other.effects.values() {
            out.add_effect(sig.clone())?;
        }
        Ok(out)
    }

    pub fn kinds(&self) -> &BTreeSet<NodeKind> {
        &self.kinds
    }

    pub fn contains(&self, kind: &NodeKind) -> bool {
        self.kinds.contains(kind)
    }

    pub fn effect_signature(&self, name: &str) -> Option<&Arc<EffectSig>> {
        self.effects.get(name)
    }

    pub fn effects(&self) -> impl Iterator<Item = &Arc<EffectSig>> {
        self.effects.values()
    }

    fn require(&self, kind: NodeKind) -> Result<(), TermError> {
        if self.kinds.contains(&kind) {
            Ok(())
        } else {
            Err(TermError::KindNotInVocabulary(kind))
        }
    }

    /// Checks that every node of `t` uses a kind of this vocabulary.
    pub fn admits(&self, t: &Term) -> Result<(), TermError> {
        let mut seen = BTreeSet::new();
        t.collect_kinds(&mut seen);
        for k in seen {
            self.require(k)?;
        }
        Ok(())
    }
}

type HostCont = dyn Fn(&Value) -> Term + Send + Sync;

/// The continuation of a `Bind`.
#[derive(Clone)]
pub enum Continuation {
    /// Total over the scrutinee's carrier.
    Table(Arc<BTreeMap<Value, Term>>),
    /// Host closure; interpreters may use it, the derivation checker may not.
    Opaque { name: String, f: Arc<HostCont> },
}

impl Continuation {
    pub fn tabulate(ty: &TypeRef, mut f: impl FnMut(&Value) -> Term) -> Self {
        Continuation::Table(Arc::new(
            ty.carrier().iter().map(|v| (v.clone(), f(v))).collect(),
        ))
    }

    /// The same term for every value of `ty`.
    pub fn constant(ty: &TypeRef, t: &Term) -> Self {
        Self::tabulate(ty, |_| t.clone())
    }

    pub fn opaque(name: impl Into<String>, f: impl Fn(&Value) -> Term + Send + Sync + 'static) -> Self {
        Continuation::Opaque {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn apply(&self, v: &Value) -> Option<Term> {
        match self {
            Continuation::Table(t) => t.get(v).cloned(),
            Continuation::Opaque { f, .. } => Some(f(v)),
        }
    }

    pub fn table(&self) -> Option<&BTreeMap<Value, Term>> {
        match self {
            Continuation::Table(t) => Some(t),
            Continuation::Opaque { .. } => None,
        }
    }
}

impl PartialEq for Continuation {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Continuation::Table(a), Continuation::Table(b)) => Arc::ptr_eq(a, b) || a == b,
            (Continuation::Opaque { name: n1, f: f1 }, Continuation::Opaque { name: n2, f: f2 }) => {
                n1 == n2 && Arc::ptr_eq(f1, f2)
            }
            _ => false,
        }
    }
}

impl fmt::Debug for Continuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Continuation::Table(t) => f.debug_map().entries(t.iter()).finish(),
            Continuation::Opaque { name, .. } => write!(f, "<{name}>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Pure(Value),
    FMap {
        g: FnRef,
        arg: Term,
    },
    LiftA2 {
        f: FnRef,
        left: Term,
        right: Term,
    },
    SelectBy {
        f: FnRef,
        scrutinee: Term,
        handler: Term,
    },
    Bind {
        m: Term,
        k: Continuation,
    },
    KPlus(Term),
    Plus(Term, Term),
    Effect {
        sig: Arc<EffectSig>,
        op: String,
        args: Vec<Value>,
    },
}

#[derive(Debug)]
pub struct TermNode {
    ty: TypeRef,
    node: Node,
}

/// A shared, immutable term.
#[derive(Clone)]
pub struct Term(Arc<TermNode>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (same_type(&self.0.ty, &other.0.ty) && self.0.node == other.0.node)
    }
}

impl Term {
    /// Unchecked constructor for crate-internal rewriting.
    pub(crate) fn new(ty: TypeRef, node: Node) -> Self {
        Term(Arc::new(TermNode { ty, node }))
    }

    pub fn ty(&self) -> &TypeRef {
        &self.0.ty
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn kind(&self) -> NodeKind {
        match &self.0.node {
            Node::Pure(_) => NodeKind::Pure,
            Node::FMap { .. } => NodeKind::FMap,
            Node::LiftA2 { .. } => NodeKind::LiftA2,
            Node::SelectBy { .. } => NodeKind::SelectBy,
            Node::Bind { .. } => NodeKind::Bind,
            Node::KPlus(_) => NodeKind::KPlus,
            Node::Plus(..) => NodeKind::Plus,
            Node::Effect { sig, .. } => NodeKind::Effect(sig.name().into()),
        }
    }

    /// Pointer identity.
    pub fn same(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Address used as a memo key; stable while the term is alive.
    pub fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Direct children, continuations expanded in carrier order.
    pub fn children(&self) -> Vec<Term> {
        match &self.0.node {
            Node::Pure(_) | Node::Effect { .. } => vec![],
            Node::FMap { arg, .. } => vec![arg.clone()],
            Node::LiftA2 { left, right, .. } => vec![left.clone(), right.clone()],
            Node::SelectBy {
                scrutinee, handler, ..
            } => vec![scrutinee.clone(), handler.clone()],
            Node::Bind { m, k } => {
                let mut out = vec![m.clone()];
                if let Some(t) = k.table() {
                    out.extend(t.values().cloned());
                }
                out
            }
            Node::KPlus(a) => vec![a.clone()],
            Node::Plus(a, b) => vec![a.clone(), b.clone()],
        }
    }

    fn collect_kinds(&self, out: &mut BTreeSet<NodeKind>) {
        let mut stack = vec![self.clone()];
        let mut visited = BTreeSet::new();
        while let Some(t) = stack.pop() {
            if !visited.insert(t.addr()) {
                continue;
            }
            out.insert(t.kind());
            stack.extend(t.children());
        }
    }

    /// Number of nodes counting shared subterms once per occurrence.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }

    /// Checks the well-formedness invariants: child types line up with
    /// function domains and every table continuation covers its carrier.
    pub fn check_well_formed(&self) -> Result<(), TermError> {
        let mut stack = vec![self.clone()];
        let mut visited = BTreeSet::new();
        while let Some(t) = stack.pop() {
            if !visited.insert(t.addr()) {
                continue;
            }
            match t.node() {
                Node::Pure(v) => expect_member(t.ty(), v)?,
                Node::FMap { g, arg } => {
                    expect_fn(g, &[arg.ty()], t.ty())?;
                }
                Node::LiftA2 { f, left, right } => {
                    expect_fn(f, &[left.ty(), right.ty()], t.ty())?;
                }
                Node::SelectBy {
                    f,
                    scrutinee,
                    handler,
                } => {
                    let want = select_codomain(handler.ty(), t.ty());
                    expect_fn(f, &[scrutinee.ty()], &want)?;
                }
                Node::Bind { m, k } => {
                    if let Some(table) = k.table() {
                        for v in m.ty().carrier() {
                            match table.get(v) {
                                Some(next) => expect_same(next.ty(), t.ty())?,
                                None => return Err(TermError::IncompleteContinuation(v.clone())),
                            }
                        }
                        if table.len() != m.ty().len() {
                            return Err(TermError::TypeMismatch(
                                "continuation has entries outside the scrutinee carrier".into(),
                            ));
                        }
                    }
                }
                Node::KPlus(a) => expect_same(a.ty(), t.ty())?,
                Node::Plus(a, b) => {
                    expect_same(a.ty(), t.ty())?;
                    expect_same(b.ty(), t.ty())?;
                }
                Node::Effect { sig, op, args } => check_effect_call(sig, op, args, t.ty())?,
            }
            stack.extend(t.children());
        }
        Ok(())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::sexpr::term_to_string(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::sexpr::term_to_string(self))
    }
}

fn expect_same(got: &TypeRef, want: &TypeRef) -> Result<(), TermError> {
    if same_type(got, want) {
        Ok(())
    } else {
        Err(TermError::TypeMismatch(format!("expected {want}, found {got}")))
    }
}

fn expect_member(ty: &TypeRef, v: &Value) -> Result<(), TermError> {
    if ty.contains(v) {
        Ok(())
    } else {
        Err(TermError::TypeMismatch(format!("{v} is not a value of {ty}")))
    }
}

fn expect_fn(f: &FnRef, args: &[&TypeRef], result: &TypeRef) -> Result<(), TermError> {
    if f.arity() != args.len() {
        return Err(TermError::TypeMismatch(format!(
            "{} takes {} arguments, given {}",
            f.name(),
            f.arity(),
            args.len()
        )));
    }
    for (d, a) in f.domain().iter().zip(args) {
        expect_same(a, d)?;
    }
    expect_same(f.codomain(), result)
}

/// `(Y -> R) + R`, the codomain of a `selectBy` dispatcher.
pub fn select_codomain(handler: &TypeRef, result: &TypeRef) -> TypeRef {
    FiniteType::either(&FiniteType::function(handler, result), result)
}

fn check_effect_call(
    sig: &EffectSig,
    op: &str,
    args: &[Value],
    result: &TypeRef,
) -> Result<(), TermError> {
    let decl = sig.op(op).ok_or_else(|| TermError::UnknownOperation {
        sig: sig.name().into(),
        op: op.into(),
    })?;
    if let Some(arg_tys) = &decl.args {
        if arg_tys.len() != args.len() {
            return Err(TermError::TypeMismatch(format!(
                "{}.{op} takes {} arguments, given {}",
                sig.name(),
                arg_tys.len(),
                args.len()
            )));
        }
        for (t, v) in arg_tys.iter().zip(args) {
            expect_member(t, v)?;
        }
    }
    if let Some(r) = &decl.result {
        expect_same(result, r)?;
    }
    Ok(())
}

/// Smart constructors. Each checks the vocabulary and the types, and stores
/// its arguments unchanged.
impl Vocabulary {
    pub fn pure(&self, ty: &TypeRef, v: Value) -> Result<Term, TermError> {
        self.require(NodeKind::Pure)?;
        expect_member(ty, &v)?;
        Ok(Term::new(ty.clone(), Node::Pure(v)))
    }

    pub fn fmap(&self, g: &FnRef, arg: &Term) -> Result<Term, TermError> {
        self.require(NodeKind::FMap)?;
        expect_fn(g, &[arg.ty()], g.codomain())?;
        Ok(Term::new(
            g.codomain().clone(),
            Node::FMap {
                g: g.clone(),
                arg: arg.clone(),
            },
        ))
    }

    pub fn lift_a2(&self, f: &FnRef, left: &Term, right: &Term) -> Result<Term, TermError> {
        self.require(NodeKind::LiftA2)?;
        expect_fn(f, &[left.ty(), right.ty()], f.codomain())?;
        Ok(Term::new(
            f.codomain().clone(),
            Node::LiftA2 {
                f: f.clone(),
                left: left.clone(),
                right: right.clone(),
            },
        ))
    }

    /// `selectBy f a b` with `f : X -> (Y -> R) + R`; `result` is `R`.
    pub fn select_by(
        &self,
        f: &FnRef,
        scrutinee: &Term,
        handler: &Term,
        result: &TypeRef,
    ) -> Result<Term, TermError> {
        self.require(NodeKind::SelectBy)?;
        let want = select_codomain(handler.ty(), result);
        expect_fn(f, &[scrutinee.ty()], &want)?;
        Ok(Term::new(
            result.clone(),
            Node::SelectBy {
                f: f.clone(),
                scrutinee: scrutinee.clone(),
                handler: handler.clone(),
            },
        ))
    }

    /// `select a b` for `a : A + B` and `b : A -> B`, encoded through
    /// `selectBy` with the dispatcher
    /// `inl x => inl (fun h => h x) | inr y => inr y`.
    pub fn select(&self, a: &Term, b: &Term) -> Result<Term, TermError> {
        self.require(NodeKind::SelectBy)?;
        let (left, right) = match a.ty().shape() {
            Shape::Sum(l, r) => (l.clone(), r.clone()),
            _ => {
                return Err(TermError::TypeMismatch(format!(
                    "select scrutinee must be a sum, found {}",
                    a.ty()
                )))
            }
        };
        match b.ty().shape() {
            Shape::Function(d, c) if same_type(d, &left) && same_type(c, &right) => {}
            _ => {
                return Err(TermError::TypeMismatch(format!(
                    "select handler must be {left} -> {right}, found {}",
                    b.ty()
                )))
            }
        }
        let dispatcher = select_dispatcher(&left, &right)?;
        self.select_by(&dispatcher, a, b, &right)
    }

    pub fn bind(&self, m: &Term, k: Continuation, result: &TypeRef) -> Result<Term, TermError> {
        self.require(NodeKind::Bind)?;
        if let Some(table) = k.table() {
            for v in m.ty().carrier() {
                match table.get(v) {
                    Some(next) => expect_same(next.ty(), result)?,
                    None => return Err(TermError::IncompleteContinuation(v.clone())),
                }
            }
            if table.len() != m.ty().len() {
                return Err(TermError::TypeMismatch(
                    "continuation has entries outside the scrutinee carrier".into(),
                ));
            }
        }
        Ok(Term::new(result.clone(), Node::Bind { m: m.clone(), k }))
    }

    /// `a >> b`: bind with a constant continuation.
    pub fn seq(&self, a: &Term, b: &Term) -> Result<Term, TermError> {
        self.bind(a, Continuation::constant(a.ty(), b), b.ty())
    }

    pub fn kplus(&self, a: &Term) -> Result<Term, TermError> {
        self.require(NodeKind::KPlus)?;
        Ok(Term::new(a.ty().clone(), Node::KPlus(a.clone())))
    }

    pub fn plus(&self, a: &Term, b: &Term) -> Result<Term, TermError> {
        self.require(NodeKind::Plus)?;
        expect_same(b.ty(), a.ty())?;
        Ok(Term::new(a.ty().clone(), Node::Plus(a.clone(), b.clone())))
    }

    /// Effect call whose operation has a fixed result type.
    pub fn effect(&self, sig: &str, op: &str, args: Vec<Value>) -> Result<Term, TermError> {
        let s = self.effect_sig(sig)?;
        let decl = s.op(op).ok_or_else(|| TermError::UnknownOperation {
            sig: sig.into(),
            op: op.into(),
        })?;
        let ty = decl.result.clone().ok_or_else(|| {
            TermError::TypeMismatch(format!("{sig}.{op} is polymorphic; give its result type"))
        })?;
        self.effect_typed(sig, op, args, &ty)
    }

    /// Effect call with an explicit result type (for polymorphic operations).
    pub fn effect_typed(
        &self,
        sig: &str,
        op: &str,
        args: Vec<Value>,
        result: &TypeRef,
    ) -> Result<Term, TermError> {
        let s = self.effect_sig(sig)?.clone();
        check_effect_call(&s, op, &args, result)?;
        Ok(Term::new(
            result.clone(),
            Node::Effect {
                sig: s,
                op: op.into(),
                args,
            },
        ))
    }

    fn effect_sig(&self, sig: &str) -> Result<&Arc<EffectSig>, TermError> {
        self.effects
            .get(sig)
            .ok_or_else(|| TermError::KindNotInVocabulary(NodeKind::Effect(sig.into())))
    }

    /// `repeat a n` (n >= 1 copies, last result kept), sequenced with
    /// `liftA2 (fun _ x => x)` when available and with `>>` otherwise.
    pub fn repeat(&self, a: &Term, n: usize) -> Result<Term, TermError> {
        assert!(n >= 1, "repeat needs at least one copy");
        if n == 1 {
            return Ok(a.clone());
        }
        let rest = self.repeat(a, n - 1)?;
        if self.contains(&NodeKind::LiftA2) {
            self.lift_a2(&stdlib::second(a.ty(), a.ty()), a, &rest)
        } else {
            self.seq(a, &rest)
        }
    }
}

/// The dispatcher `select` uses for `A + B` scrutinees and `A -> B` handlers.
pub fn select_dispatcher(left: &TypeRef, right: &TypeRef) -> Result<FnRef, TermError> {
    let handler = FiniteType::function(left, right);
    let sum = FiniteType::either(left, right);
    let codomain = select_codomain(&handler, right);
    let handler_for_closure = handler.clone();
    Func::tabulate(
        format!("select-dispatch[{left},{right}]"),
        vec![sum],
        codomain,
        move |args| match &args[0] {
            Value::Left(x) => {
                let apply_to_x = handler_for_closure
                    .carrier()
                    .iter()
                    .map(|h| (h.clone(), h.call(x).cloned().expect("total")))
                    .collect();
                Value::Left(Box::new(Value::Map(apply_to_x)))
            }
            Value::Right(y) => Value::Right(y.clone()),
            other => unreachable!("sum carrier holds {other}"),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::stdlib::{andb, negb};

    fn data_eff() -> Arc<EffectSig> {
        EffectSig::new(
            "DataEff",
            vec![EffectOp::fixed(
                "GetData",
                vec![FiniteType::symbols("var", &["x", "y", "z"])],
                FiniteType::bool(),
            )],
        )
        .unwrap()
    }

    fn reified() -> Vocabulary {
        Vocabulary::of(&[NodeKind::Pure, NodeKind::FMap, NodeKind::LiftA2])
            .with_effect(data_eff())
            .unwrap()
    }

    #[test]
    fn union_is_set_union() {
        let a = Vocabulary::of(&[NodeKind::Pure, NodeKind::LiftA2]);
        let b = Vocabulary::of(&[NodeKind::Bind]);
        let u = a.union(&b).unwrap();
        assert_eq!(
            u.kinds().iter().cloned().collect::<Vec<_>>(),
            vec![NodeKind::Pure, NodeKind::LiftA2, NodeKind::Bind]
        );
        assert_eq!(a.union(&a).unwrap(), a);
        let c = Vocabulary::new().with_effect(data_eff()).unwrap();
        let left = Vocabulary::of(&[NodeKind::Pure])
            .union(&Vocabulary::of(&[NodeKind::LiftA2]))
            .unwrap()
            .union(&c)
            .unwrap();
        let right = Vocabulary::of(&[NodeKind::Pure])
            .union(&Vocabulary::of(&[NodeKind::LiftA2]).union(&c).unwrap())
            .unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn conflicting_effect_names_are_rejected() {
        let other = EffectSig::new(
            "DataEff",
            vec![EffectOp::fixed("GetData", vec![], FiniteType::unit())],
        )
        .unwrap();
        let a = Vocabulary::new().with_effect(data_eff()).unwrap();
        let b = Vocabulary::new().with_effect(other).unwrap();
        assert_eq!(
            a.union(&b),
            Err(TermError::DuplicateEffectName("DataEff".into()))
        );
    }

    #[test]
    fn constructors_keep_children_identical() {
        let v = reified();
        let x = v.effect("DataEff", "GetData", vec![Value::sym("x")]).unwrap();
        let t = v.pure(&FiniteType::bool(), Value::Bool(true)).unwrap();
        let conj = v.lift_a2(&andb(), &x, &t).unwrap();
        match conj.node() {
            Node::LiftA2 { left, right, .. } => {
                assert!(left.same(&x));
                assert!(right.same(&t));
            }
            _ => panic!("expected liftA2"),
        }
        assert_eq!(conj.to_string(), "(liftA2 andb (effect DataEff GetData x) (pure true))");
        let neg = v.fmap(&negb(), &conj).unwrap();
        assert!(neg.children()[0].same(&conj));
    }

    #[test]
    fn constructor_errors() {
        let v = reified();
        let unit = v.pure(&FiniteType::unit(), Value::Unit).unwrap();
        assert_eq!(unit.kind(), NodeKind::Pure);
        assert_eq!(
            v.bind(&unit, Continuation::constant(&FiniteType::unit(), &unit), unit.ty()),
            Err(TermError::KindNotInVocabulary(NodeKind::Bind))
        );
        let x = v.effect("DataEff", "GetData", vec![Value::sym("x")]).unwrap();
        assert!(matches!(
            v.lift_a2(&andb(), &x, &unit),
            Err(TermError::TypeMismatch(_))
        ));
        assert!(matches!(
            v.pure(&FiniteType::bool(), Value::Nat(3)),
            Err(TermError::TypeMismatch(_))
        ));
    }

    #[test]
    fn select_builds_the_dispatcher_encoding() {
        let b = FiniteType::bool();
        let v = Vocabulary::of(&[NodeKind::Pure, NodeKind::SelectBy]);
        let sum = FiniteType::either(&b, &b);
        let a = v
            .pure(&sum, Value::Right(Box::new(Value::Bool(true))))
            .unwrap();
        let handler_ty = FiniteType::function(&b, &b);
        let h = v.pure(&handler_ty, handler_ty.carrier()[0].clone()).unwrap();
        let s = v.select(&a, &h).unwrap();
        match s.node() {
            Node::SelectBy {
                f,
                scrutinee,
                handler,
            } => {
                assert!(scrutinee.same(&a));
                assert!(handler.same(&h));
                match f.body() {
                    crate::func::FnBody::Table(t) => assert_eq!(t.len(), 4),
                    _ => panic!("dispatcher must be a table"),
                }
                assert_eq!(
                    f.apply(&[Value::Right(Box::new(Value::Bool(false)))]),
                    Some(Value::Right(Box::new(Value::Bool(false))))
                );
            }
            _ => panic!("expected selectBy"),
        }
        let plain = v.pure(&b, Value::Bool(true)).unwrap();
        assert!(matches!(v.select(&plain, &h), Err(TermError::TypeMismatch(_))));
    }

    #[test]
    fn bind_requires_total_tables() {
        let v = Vocabulary::of(&[NodeKind::Pure, NodeKind::Bind]);
        let b = FiniteType::bool();
        let m = v.pure(&b, Value::Bool(true)).unwrap();
        let mut partial = BTreeMap::new();
        partial.insert(Value::Bool(true), m.clone());
        assert_eq!(
            v.bind(&m, Continuation::Table(Arc::new(partial)), &b),
            Err(TermError::IncompleteContinuation(Value::Bool(false)))
        );
        let ok = v.bind(&m, Continuation::tabulate(&b, |x| v.pure(&b, x.clone()).unwrap()), &b).unwrap();
        ok.check_well_formed().unwrap();
    }

    #[test]
    fn repeat_prefers_lift_a2() {
        let b = FiniteType::bool();
        let app = Vocabulary::of(&[NodeKind::Pure, NodeKind::LiftA2]);
        let a = app.pure(&b, Value::Bool(true)).unwrap();
        assert_eq!(app.repeat(&a, 1).unwrap(), a);
        assert_eq!(app.repeat(&a, 3).unwrap().kind(), NodeKind::LiftA2);
        let mon = Vocabulary::of(&[NodeKind::Pure, NodeKind::Bind]);
        let a = mon.pure(&b, Value::Bool(true)).unwrap();
        assert_eq!(mon.repeat(&a, 2).unwrap().kind(), NodeKind::Bind);
    }
}
