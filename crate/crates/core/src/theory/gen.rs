//! Random accepted derivations, for testing soundness against the oracles.
//!
//! A derivation starts from a random term (or a random axiom instance) and
//! grows by `Trans` steps, each rewriting the current right side at a random
//! position with one axiom of the theory, used forwards or backwards.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::check::repeat_count;
use super::{check_derivation, DerivRef, Derivation, Relation, Rule, Theory, TheoryId};
use crate::error::SemError;
use crate::func::stdlib::{apply, apply_flipped, pair};
use crate::func::{FnRef, Func};
use crate::semantics::{oracle_equiv, oracle_refines, trace_sem, OutcomeModel};
use crate::term::{Continuation, EffectOp, EffectSig, Node, NodeKind, Term, Vocabulary};
use crate::value::{for_each_assignment, FiniteType, Shape, TypeRef, Value};

pub const GEN_EFF: &str = "Gen";

/// Unrolling bounds used by [`oracle_agrees`] for refinements.
pub const BOUND_L: usize = 2;
pub const BOUND_R: usize = 16;

/// Largest carrier a generated function may range over.
const MAX_CARRIER: usize = 64;

/// The relation a theory's random derivations conclude.
pub fn relation_of(id: TheoryId) -> Relation {
    match id {
        TheoryId::Repeatedly | TheoryId::Nondeterministically => Relation::Refine,
        _ => Relation::Equiv,
    }
}

/// Node kinds of generated terms, plus three boolean effects `a`, `b`, `c`.
pub fn vocabulary(id: TheoryId) -> Vocabulary {
    use NodeKind::*;
    let kinds: &[NodeKind] = match id {
        TheoryId::Statically | TheoryId::StaticallyInParallel => &[Pure, LiftA2],
        TheoryId::Dynamically => &[Pure, Bind],
        TheoryId::Nondeterministically => &[Pure, Bind, Plus],
        TheoryId::Repeatedly => &[Pure, Bind, KPlus],
        _ => &[Pure, FMap, LiftA2, SelectBy, Bind],
    };
    let b = FiniteType::bool();
    let ops = ["a", "b", "c"]
        .iter()
        .map(|op| EffectOp::fixed(op, vec![], b.clone()))
        .collect();
    Vocabulary::of(kinds)
        .with_effect(EffectSig::new(GEN_EFF, ops).expect("distinct ops"))
        .expect("fresh vocabulary")
}

/// Every effect call enumerates both booleans.
pub fn model() -> OutcomeModel {
    OutcomeModel::fresh()
}

/// Generates one accepted derivation for `id` with up to `steps` rewrites.
pub fn random_derivation<R: Rng + ?Sized>(rng: &mut R, id: TheoryId, steps: usize) -> DerivRef {
    let th = Theory::of(&[id]);
    let mut g = Gen {
        rng,
        id,
        th: &th,
        rel: relation_of(id),
        vocab: vocabulary(id),
        bool_ty: FiniteType::bool(),
        fresh: 0,
    };
    let mut d = g.base();
    for _ in 0..steps {
        if g.rel == Relation::Equiv && g.rng.gen_bool(0.15) {
            d = Derivation::sym(&d);
        }
        if let Some(s) = g.rewrite(d.rhs(), 3) {
            d = Derivation::trans(&d, &s);
        }
    }
    debug_assert!(check_derivation(&th, &d).is_accepted(), "{id}: {:?}", check_derivation(&th, &d));
    d
}

/// A random boolean term over [`vocabulary`]`(id)`.
pub fn random_term<R: Rng + ?Sized>(rng: &mut R, id: TheoryId, depth: usize) -> Term {
    let th = Theory::of(&[id]);
    Gen {
        rng,
        id,
        th: &th,
        rel: relation_of(id),
        vocab: vocabulary(id),
        bool_ty: FiniteType::bool(),
        fresh: 0,
    }
    .term(depth)
}

/// A random table function `bool × bool -> bool`.
pub fn random_bool_fn<R: Rng + ?Sized>(rng: &mut R, name: &str) -> FnRef {
    let b = FiniteType::bool();
    let mut table = BTreeMap::new();
    for x in [false, true] {
        for y in [false, true] {
            table.insert(vec![Value::Bool(x), Value::Bool(y)], Value::Bool(rng.gen()));
        }
    }
    Func::from_table(name, vec![b.clone(), b.clone()], b, table).expect("total table")
}

/// Whether the semantic relation matching `d` holds: trace equality for
/// `Statically` and `Dynamically`, powerset equality for
/// `StaticallyInParallel`, bounded inclusion for refinements.
pub fn oracle_agrees(id: TheoryId, d: &Derivation) -> Result<bool, SemError> {
    let m = model();
    let (l, r) = (d.lhs(), d.rhs());
    match d.rel() {
        Relation::Refine => oracle_refines(l, r, &m, BOUND_L, BOUND_R),
        Relation::Equiv if id == TheoryId::StaticallyInParallel => oracle_equiv(l, r, &m, BOUND_L),
        Relation::Equiv => Ok(trace_sem(l, &m, BOUND_L)? == trace_sem(r, &m, BOUND_L)?),
    }
}

struct Gen<'a, R: ?Sized> {
    rng: &'a mut R,
    id: TheoryId,
    th: &'a Theory,
    rel: Relation,
    vocab: Vocabulary,
    bool_ty: TypeRef,
    fresh: usize,
}

impl<R: Rng + ?Sized> Gen<'_, R> {
    fn term(&mut self, depth: usize) -> Term {
        let v = self.vocab.clone();
        if depth == 0 || self.rng.gen_bool(0.3) {
            return if self.rng.gen_bool(0.75) {
                let op = *["a", "b", "c"].choose(self.rng).expect("non-empty");
                v.effect(GEN_EFF, op, vec![]).expect("declared")
            } else {
                v.pure(&self.bool_ty, Value::Bool(self.rng.gen())).expect("bool")
            };
        }
        let b = self.bool_ty.clone();
        match self.id {
            TheoryId::Statically | TheoryId::StaticallyInParallel => {
                let f = self.random_fn(vec![b.clone(), b.clone()], &b);
                let (l, r) = (self.term(depth - 1), self.term(depth - 1));
                v.lift_a2(&f, &l, &r).expect("bool operands")
            }
            TheoryId::Nondeterministically if self.rng.gen_bool(0.5) => {
                let (l, r) = (self.term(depth - 1), self.term(depth - 1));
                v.plus(&l, &r).expect("same type")
            }
            TheoryId::Repeatedly if self.rng.gen_bool(0.3) => {
                let a = self.term(depth - 1);
                v.kplus(&a).expect("in vocabulary")
            }
            _ => {
                let m = self.term(depth - 1);
                let k = if self.rng.gen_bool(0.5) {
                    Continuation::constant(&b, &self.term(depth - 1))
                } else {
                    let branches: Vec<Term> = (0..b.len()).map(|_| self.term(depth - 1)).collect();
                    let mut it = branches.into_iter();
                    Continuation::tabulate(&b, |_| it.next().expect("one per value"))
                };
                v.bind(&m, k, &b).expect("bool continuation")
            }
        }
    }

    /// A small term of type `ty`.
    fn term_of(&mut self, ty: &TypeRef) -> Term {
        if **ty == *self.bool_ty {
            return self.term(1);
        }
        let x = ty.carrier().choose(self.rng).expect("inhabited").clone();
        self.vocab.pure(ty, x).expect("member")
    }

    fn random_fn(&mut self, dom: Vec<TypeRef>, cod: &TypeRef) -> FnRef {
        self.fn_with(dom, cod, |_| None)
    }

    /// A table function agreeing with `fixed` where it answers, random elsewhere.
    fn fn_with(&mut self, dom: Vec<TypeRef>, cod: &TypeRef, fixed: impl Fn(&[Value]) -> Option<Value>) -> FnRef {
        self.fresh += 1;
        let mut table = BTreeMap::new();
        let rng = &mut *self.rng;
        for_each_assignment(&dom, |args| {
            let out = fixed(args).unwrap_or_else(|| cod.carrier().choose(rng).expect("inhabited").clone());
            table.insert(args.to_vec(), out);
            Ok::<(), ()>(())
        })
        .expect("infallible");
        Func::from_table(format!("f{}", self.fresh), dom, cod.clone(), table).expect("total table")
    }

    fn small(&self, tys: &[&TypeRef]) -> bool {
        tys.iter().map(|t| t.len()).product::<usize>() <= MAX_CARRIER
    }

    /// A random start: reflexivity, or a fresh instance of a rule no
    /// rewrite can introduce.
    fn base(&mut self) -> DerivRef {
        let t = self.term(2);
        match self.id {
            TheoryId::Statically if self.rng.gen_bool(0.3) => self.associativity_instance(),
            TheoryId::Repeatedly if self.rng.gen_bool(0.4) => {
                let n = self.rng.gen_range(1..=3);
                let t = self.term(1);
                let lhs = self.vocab.repeat(&t, n).expect("bind in vocabulary");
                let rhs = self.vocab.kplus(&t).expect("kplus in vocabulary");
                Derivation::repeat(&lhs, &rhs, n)
            }
            _ => Derivation::refl(self.rel, &t),
        }
    }

    fn associativity_instance(&mut self) -> DerivRef {
        let b = self.bool_ty.clone();
        let (x, y, z) = (self.term(1), self.term(1), self.term(1));
        let bb = FiniteType::function(&b, &b);
        let f = self.random_fn(vec![b.clone(), b.clone()], &bb);
        let g = self.fn_with(vec![b.clone(), b.clone()], &bb, |yz| {
            Some(Value::Map(
                b.carrier()
                    .iter()
                    .map(|xv| (xv.clone(), f.apply(&[xv.clone(), yz[0].clone()]).expect("total").call(&yz[1]).expect("total").clone()))
                    .collect(),
            ))
        });
        let v = &self.vocab;
        let lhs = v.lift_a2(&apply(&b, &b), &v.lift_a2(&f, &x, &y).expect("typed"), &z).expect("typed");
        let rhs = v.lift_a2(&apply_flipped(&b, &b), &x, &v.lift_a2(&g, &y, &z).expect("typed")).expect("typed");
        Derivation::axiom(Relation::Equiv, Rule::Associativity, &lhs, &rhs)
    }

    /// A derivation `t R t'` for some `t'`, rewriting at a random position.
    fn rewrite(&mut self, t: &Term, depth: usize) -> Option<DerivRef> {
        if depth > 0 && self.rng.gen_bool(0.5) {
            if let Some(d) = self.descend(t, depth - 1) {
                return Some(d);
            }
        }
        let mut cands: Vec<DerivRef> = self
            .candidates(t)
            .into_iter()
            .filter(|d| check_derivation(self.th, d).is_accepted())
            .filter_map(|d| self.at_relation(d))
            .collect();
        cands.shuffle(self.rng);
        cands.pop()
    }

    /// Adapts an equivalence step to a refinement chain.
    fn at_relation(&self, d: DerivRef) -> Option<DerivRef> {
        match (d.rel(), self.rel) {
            (a, b) if a == b => Some(d),
            (Relation::Equiv, Relation::Refine) if self.th.has(Rule::Promote) => Some(Derivation::promote(&d)),
            _ => None,
        }
    }

    fn descend(&mut self, t: &Term, depth: usize) -> Option<DerivRef> {
        let rel = self.rel;
        let v = self.vocab.clone();
        let refl = |x: &Term| Derivation::refl(rel, x);
        match t.node() {
            Node::LiftA2 { f, left, right } if self.th.has(Rule::CongLiftA2) => {
                let (dl, dr) = if self.rng.gen() {
                    (self.rewrite(left, depth)?, refl(right))
                } else {
                    (refl(left), self.rewrite(right, depth)?)
                };
                let rhs = v.lift_a2(f, dl.rhs(), dr.rhs()).ok()?;
                Some(Derivation::new(rel, t, &rhs, Rule::CongLiftA2, vec![dl, dr]))
            }
            Node::Bind { m, k } if self.th.has(Rule::CongBind) => {
                let table = k.table()?;
                let at = self.rng.gen_range(0..=table.len());
                let dm = if at == 0 { self.rewrite(m, depth)? } else { refl(m) };
                let mut children = vec![dm];
                let mut next = BTreeMap::new();
                for (i, (x, kx)) in table.iter().enumerate() {
                    let d = if i + 1 == at { self.rewrite(kx, depth)? } else { refl(kx) };
                    next.insert(x.clone(), d.rhs().clone());
                    children.push(d);
                }
                let k2 = Continuation::tabulate(m.ty(), |x| next[x].clone());
                let rhs = v.bind(children[0].rhs(), k2, t.ty()).ok()?;
                Some(Derivation::new(rel, t, &rhs, Rule::CongBind, children))
            }
            Node::Plus(a, b) if self.th.has(Rule::CongPlus) => {
                let (da, db) = if self.rng.gen() {
                    (self.rewrite(a, depth)?, refl(b))
                } else {
                    (refl(a), self.rewrite(b, depth)?)
                };
                let rhs = v.plus(da.rhs(), db.rhs()).ok()?;
                Some(Derivation::new(rel, t, &rhs, Rule::CongPlus, vec![da, db]))
            }
            Node::KPlus(a) if self.th.has(Rule::CongKPlus) => {
                let da = self.rewrite(a, depth)?;
                let rhs = v.kplus(da.rhs()).ok()?;
                Some(Derivation::new(rel, t, &rhs, Rule::CongKPlus, vec![da]))
            }
            _ => None,
        }
    }

    /// Root steps from `t`; some may fail their side conditions and are
    /// filtered by the caller.
    fn candidates(&mut self, t: &Term) -> Vec<DerivRef> {
        let mut out = Vec::new();
        match self.id {
            TheoryId::Statically | TheoryId::StaticallyInParallel => self.applicative_steps(t, &mut out),
            TheoryId::Dynamically => self.monad_steps(t, &mut out),
            TheoryId::Nondeterministically => self.plus_steps(t, &mut out),
            TheoryId::Repeatedly => self.kplus_steps(t, &mut out),
            _ => {}
        }
        out
    }

    fn applicative_steps(&mut self, t: &Term, out: &mut Vec<DerivRef>) {
        let v = self.vocab.clone();
        let b = self.bool_ty.clone();
        let ty = t.ty().clone();
        let eq = |rule, l: &Term, r: &Term| Derivation::axiom(Relation::Equiv, rule, l, r);
        if self.small(&[&b, &ty]) {
            // t ≅ liftA2 f (pure a) t  and  t ≅ liftA2 f t (pure a)
            let a = Value::Bool(self.rng.gen());
            let a2 = a.clone();
            let f = self.fn_with(vec![b.clone(), ty.clone()], &ty, |xy| (xy[0] == a2).then(|| xy[1].clone()));
            let big = v.lift_a2(&f, &v.pure(&b, a.clone()).expect("bool"), t).expect("typed");
            out.push(Derivation::sym(&eq(Rule::LeftIdentity, &big, t)));
            let a2 = a.clone();
            let f = self.fn_with(vec![ty.clone(), b.clone()], &ty, |xy| (xy[1] == a2).then(|| xy[0].clone()));
            let big = v.lift_a2(&f, t, &v.pure(&b, a).expect("bool")).expect("typed");
            out.push(Derivation::sym(&eq(Rule::RightIdentity, &big, t)));
        }
        let Node::LiftA2 { f, left, right } = t.node() else { return };
        if matches!(left.node(), Node::Pure(_)) {
            out.push(eq(Rule::LeftIdentity, t, right));
        }
        if matches!(right.node(), Node::Pure(_)) {
            out.push(eq(Rule::RightIdentity, t, left));
        }
        if self.id == TheoryId::StaticallyInParallel {
            if let Ok(g) = Func::flip(f) {
                out.push(eq(Rule::Commutativity, t, &v.lift_a2(&g, right, left).expect("flipped")));
            }
            return;
        }
        // liftA2 p (liftA2 q a b) c ≅ liftA2 f a (liftA2 pair b c)
        if let Node::LiftA2 { f: q, left: a, right: bb } = left.node() {
            let c = right;
            let bc = FiniteType::product(bb.ty(), c.ty());
            if self.small(&[a.ty(), &bc]) {
                let (p, q) = (f.clone(), q.clone());
                let g = pair(bb.ty(), c.ty());
                let nf = self.fn_with(vec![a.ty().clone(), bc], &ty, |args| {
                    let Value::List(yz) = &args[1] else { return None };
                    p.apply(&[q.apply(&[args[0].clone(), yz[0].clone()])?, yz[1].clone()])
                });
                let rhs = v.lift_a2(&nf, a, &v.lift_a2(&g, bb, c).expect("typed")).expect("typed");
                out.push(eq(Rule::Naturality, t, &rhs));
            }
            // liftA2 app (liftA2 f a b) c ≅ liftA2 flipapp a (liftA2 g b c)
            if let Shape::Function(_, res) = q.codomain().shape() {
                let ar = FiniteType::function(a.ty(), res);
                if self.small(&[bb.ty(), c.ty(), &ar]) {
                    let q = q.clone();
                    let a_ty = a.ty().clone();
                    let g = self.fn_with(vec![bb.ty().clone(), c.ty().clone()], &ar, |yz| {
                        let mut m = BTreeMap::new();
                        for x in a_ty.carrier() {
                            m.insert(x.clone(), q.apply(&[x.clone(), yz[0].clone()])?.call(&yz[1])?.clone());
                        }
                        Some(Value::Map(m))
                    });
                    let rhs = v.lift_a2(&apply_flipped(a.ty(), res), a, &v.lift_a2(&g, bb, c).expect("typed"));
                    if let Ok(rhs) = rhs {
                        out.push(eq(Rule::Associativity, t, &rhs));
                    }
                }
            }
        }
        // the reverse of both
        if let Node::LiftA2 { f: g, left: bb, right: c } = right.node() {
            let a = left;
            let ab = FiniteType::product(a.ty(), bb.ty());
            if self.small(&[&ab, c.ty()]) {
                let (f, g) = (f.clone(), g.clone());
                let q = pair(a.ty(), bb.ty());
                let p = self.fn_with(vec![ab, c.ty().clone()], &ty, |args| {
                    let Value::List(xy) = &args[0] else { return None };
                    f.apply(&[xy[0].clone(), g.apply(&[xy[1].clone(), args[1].clone()])?])
                });
                let lhs = v.lift_a2(&p, &v.lift_a2(&q, a, bb).expect("typed"), c).expect("typed");
                out.push(Derivation::sym(&eq(Rule::Naturality, &lhs, t)));
            }
            if let Shape::Function(_, res) = g.codomain().shape() {
                let cr = FiniteType::function(c.ty(), res);
                if self.small(&[a.ty(), bb.ty(), &cr]) {
                    let g = g.clone();
                    let c_ty = c.ty().clone();
                    let f = self.fn_with(vec![a.ty().clone(), bb.ty().clone()], &cr, |xy| {
                        let mut m = BTreeMap::new();
                        for z in c_ty.carrier() {
                            m.insert(z.clone(), g.apply(&[xy[1].clone(), z.clone()])?.call(&xy[0])?.clone());
                        }
                        Some(Value::Map(m))
                    });
                    let lhs = v.lift_a2(&f, a, bb).and_then(|ab| v.lift_a2(&apply(c.ty(), res), &ab, c));
                    if let Ok(lhs) = lhs {
                        out.push(Derivation::sym(&eq(Rule::Associativity, &lhs, t)));
                    }
                }
            }
        }
    }

    fn monad_steps(&mut self, t: &Term, out: &mut Vec<DerivRef>) {
        let v = self.vocab.clone();
        let b = self.bool_ty.clone();
        let ty = t.ty().clone();
        let eq = |rule, l: &Term, r: &Term| Derivation::axiom(Relation::Equiv, rule, l, r);
        // t ≅ t >>= pure
        let back = Continuation::tabulate(&ty, |x| v.pure(&ty, x.clone()).expect("member"));
        out.push(Derivation::sym(&eq(Rule::MonadRightIdentity, &v.bind(t, back, &ty).expect("typed"), t)));
        // t ≅ pure a >>= k  with  k a = t
        let a = Value::Bool(self.rng.gen());
        let branches: Vec<Term> = b.carrier().iter().map(|x| if *x == a { t.clone() } else { self.term_of(&ty) }).collect();
        let mut it = branches.into_iter();
        let k = Continuation::tabulate(&b, |_| it.next().expect("one per value"));
        let big = v.bind(&v.pure(&b, a).expect("bool"), k, &ty).expect("typed");
        out.push(Derivation::sym(&eq(Rule::MonadLeftIdentity, &big, t)));
        let Node::Bind { m, k } = t.node() else { return };
        out.push(eq(Rule::MonadRightIdentity, t, m));
        if let (Node::Pure(x), Some(kx)) = (m.node(), k.apply(&b.carrier()[0])) {
            let _ = kx;
            if let Some(r) = k.apply(x) {
                out.push(eq(Rule::MonadLeftIdentity, t, &r));
            }
        }
        // (m >>= g) >>= h ≅ m >>= (fun x => g x >>= h)
        if let (Node::Bind { m: m0, k: g }, Some(_)) = (m.node(), k.table()) {
            let rhs_k = Continuation::tabulate(m0.ty(), |x| {
                v.bind(&g.apply(x).expect("total"), k.clone(), &ty).expect("typed")
            });
            out.push(eq(Rule::MonadAssociativity, t, &v.bind(m0, rhs_k, &ty).expect("typed")));
        }
        // and back, when every branch binds the same continuation
        if let Some(table) = k.table() {
            let inner: Option<Vec<(Term, Continuation)>> = table
                .values()
                .map(|kx| match kx.node() {
                    Node::Bind { m, k } => Some((m.clone(), k.clone())),
                    _ => None,
                })
                .collect();
            if let Some(inner) = inner {
                let (first_m, h) = &inner[0];
                let same_h = inner.iter().all(|(gm, hk)| {
                    gm.ty() == first_m.ty() && hk.table().is_some() && hk.table() == h.table()
                });
                if same_h {
                    let mut it = inner.iter().map(|(gm, _)| gm.clone());
                    let g = Continuation::tabulate(m.ty(), |_| it.next().expect("one per value"));
                    let lhs = v
                        .bind(m, g, first_m.ty())
                        .and_then(|mg| v.bind(&mg, h.clone(), &ty));
                    if let Ok(lhs) = lhs {
                        out.push(Derivation::sym(&eq(Rule::MonadAssociativity, &lhs, t)));
                    }
                }
            }
        }
    }

    fn plus_steps(&mut self, t: &Term, out: &mut Vec<DerivRef>) {
        let v = self.vocab.clone();
        let other = self.term_of(t.ty());
        let refine = |rule, l: &Term, r: &Term| Derivation::axiom(Relation::Refine, rule, l, r);
        let eq = |rule, l: &Term, r: &Term| Derivation::axiom(Relation::Equiv, rule, l, r);
        out.push(refine(Rule::LeftPlus, t, &v.plus(t, &other).expect("same type")));
        out.push(refine(Rule::RightPlus, t, &v.plus(&other, t).expect("same type")));
        let Node::Plus(a, b) = t.node() else { return };
        let swapped = v.plus(b, a).expect("same type");
        out.push(eq(Rule::PlusCommutativity, t, &swapped));
        out.push(Derivation::new(
            Relation::Refine,
            t,
            &swapped,
            Rule::PlusLub,
            vec![refine(Rule::RightPlus, a, &swapped), refine(Rule::LeftPlus, b, &swapped)],
        ));
        if a == b {
            let refl = Derivation::refl(Relation::Refine, a);
            out.push(Derivation::new(Relation::Refine, t, a, Rule::PlusLub, vec![refl.clone(), refl]));
        }
        if let Node::Plus(b1, c) = b.node() {
            let rhs = v.plus(&v.plus(a, b1).expect("same type"), c).expect("same type");
            out.push(eq(Rule::PlusAssociativity, t, &rhs));
        }
        if let Node::Plus(a1, b1) = a.node() {
            let lhs = v.plus(a1, &v.plus(b1, b).expect("same type")).expect("same type");
            out.push(Derivation::sym(&eq(Rule::PlusAssociativity, &lhs, t)));
        }
    }

    fn kplus_steps(&mut self, t: &Term, out: &mut Vec<DerivRef>) {
        let v = self.vocab.clone();
        out.push(Derivation::repeat(t, &v.kplus(t).expect("in vocabulary"), 1));
        if let Some((m, n)) = repetition(t) {
            out.push(Derivation::repeat(t, &v.kplus(&m).expect("in vocabulary"), n));
        }
        let Node::KPlus(a) = t.node() else { return };
        // kplus (kplus b) ⊑ kplus b
        if matches!(a.node(), Node::KPlus(_)) {
            out.push(Derivation::new(
                Relation::Refine,
                t,
                a,
                Rule::Kplus,
                vec![Derivation::refl(Relation::Refine, a)],
            ));
        }
        // kplus (repeat m n) ⊑ kplus m
        if let Some((m, n)) = repetition(a) {
            let km = v.kplus(&m).expect("in vocabulary");
            out.push(Derivation::new(
                Relation::Refine,
                t,
                &km,
                Rule::Kplus,
                vec![Derivation::repeat(a, &km, n)],
            ));
        }
    }
}

/// `(m, n)` when `t` is `repeat m n` with `n >= 2`.
fn repetition(t: &Term) -> Option<(Term, usize)> {
    let Node::Bind { m, .. } = t.node() else { return None };
    match repeat_count(t, m) {
        Ok(Some(n)) if n >= 2 => Some((m.clone(), n)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const THEORIES: [TheoryId; 5] = [
        TheoryId::Statically,
        TheoryId::StaticallyInParallel,
        TheoryId::Dynamically,
        TheoryId::Nondeterministically,
        TheoryId::Repeatedly,
    ];

    #[test]
    fn generated_derivations_are_accepted_and_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for id in THEORIES {
            let th = Theory::of(&[id]);
            let mut nontrivial = 0;
            for _ in 0..60 {
                let d = random_derivation(&mut rng, id, 4);
                assert_eq!(check_derivation(&th, &d), super::super::Verdict::Accepted, "{id}");
                assert!(oracle_agrees(id, &d).unwrap(), "{id}: {}", d.judgment);
                nontrivial += usize::from(d.lhs() != d.rhs());
            }
            assert!(nontrivial >= 20, "{id}: only {nontrivial} non-trivial");
        }
    }

    #[test]
    fn an_unsound_rule_is_caught() {
        // `a ⊑ plus a b` read backwards is not an inclusion
        let v = vocabulary(TheoryId::Nondeterministically);
        let a = v.effect(GEN_EFF, "a", vec![]).unwrap();
        let b = v.effect(GEN_EFF, "b", vec![]).unwrap();
        let ab = v.plus(&a, &b).unwrap();
        let backwards = Derivation::axiom(Relation::Refine, Rule::LeftPlus, &ab, &a);
        assert!(!oracle_agrees(TheoryId::Nondeterministically, &backwards).unwrap());
    }
}
