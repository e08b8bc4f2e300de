//! The derivation checker. Side conditions are decided by enumerating the
//! declared finite carriers; only table-backed functions are admitted.

use std::collections::HashSet;

use thiserror::Error;

use super::{DerivRef, Derivation, Relation, Rule, Theory};
use crate::error::TermError;
use crate::func::FnRef;
use crate::term::{Continuation, Node, Term};
use crate::value::{for_each_assignment, same_type, TypeRef, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("side condition uses opaque function {0}")]
    OpaqueFunctionInSideCondition(String),
    #[error("rule {0} is not in the theory")]
    RuleNotInTheory(Rule),
    #[error("relation {0:?} is not in the theory")]
    RelationNotInTheory(Relation),
    #[error("side condition of {rule} fails at {assignment:?}")]
    SideConditionFails { rule: Rule, assignment: Vec<Value> },
    #[error("malformed {rule} step: {msg}")]
    Malformed { rule: Rule, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    /// The first failing node (its judgment, printed) and why it failed.
    Rejected { at: String, reason: Rejection },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

pub fn check_derivation(th: &Theory, d: &DerivRef) -> Verdict {
    let mut checker = Checker {
        th,
        accepted: HashSet::new(),
    };
    match checker.check(d) {
        Ok(()) => Verdict::Accepted,
        Err((at, reason)) => Verdict::Rejected { at, reason },
    }
}

struct Checker<'a> {
    th: &'a Theory,
    /// Addresses of already accepted subderivations (shared subtrees are
    /// checked once).
    accepted: HashSet<usize>,
}

type Fail = (String, Rejection);

impl Checker<'_> {
    fn check(&mut self, d: &DerivRef) -> Result<(), Fail> {
        let key = std::sync::Arc::as_ptr(d) as usize;
        if self.accepted.contains(&key) {
            return Ok(());
        }
        // Children first: a rejection reports the deepest failing node.
        for c in &d.children {
            self.check(c)?;
        }
        self.check_node(d)
            .map_err(|reason| (d.judgment.to_string(), reason))?;
        self.accepted.insert(key);
        Ok(())
    }

    fn check_node(&self, d: &Derivation) -> Result<(), Rejection> {
        if !self.th.has(d.rule) {
            return Err(Rejection::RuleNotInTheory(d.rule));
        }
        if !self.th.relations().contains(&d.rel()) {
            return Err(Rejection::RelationNotInTheory(d.rel()));
        }
        check_step(d)
    }
}

/// Checks one inference step, assuming its children were checked.
pub(crate) fn check_step(d: &Derivation) -> Result<(), Rejection> {
    let rule = d.rule;
    let bad = |msg: &str| Rejection::Malformed {
        rule,
        msg: msg.to_string(),
    };
    let (l, r, rel) = (d.lhs(), d.rhs(), d.rel());
    if !same_type(l.ty(), r.ty()) {
        return Err(bad("sides have different types"));
    }
    let arity = |n: usize| {
        if d.children.len() == n {
            Ok(())
        } else {
            Err(bad(&format!("expects {n} premises, has {}", d.children.len())))
        }
    };
    let need_rel = |want: Relation| {
        if rel == want {
            Ok(())
        } else {
            Err(bad(&format!("concludes {} only", want.name())))
        }
    };
    // premise i must be `a R b` with the given relation
    let premise = |i: usize, want: Relation, a: &Term, b: &Term| {
        let c = &d.children[i];
        if c.rel() != want {
            return Err(bad(&format!("premise {i} has the wrong relation")));
        }
        if c.lhs() != a || c.rhs() != b {
            return Err(bad(&format!("premise {i} does not match")));
        }
        Ok(())
    };
    let fails = |assignment: Vec<Value>| Rejection::SideConditionFails { rule, assignment };

    if rule.is_equiv_axiom() {
        need_rel(Relation::Equiv)?;
        arity(0)?;
    }
    if rule.is_refine_axiom() {
        need_rel(Relation::Refine)?;
        arity(0)?;
    }

    match rule {
        Rule::Refl => {
            arity(0)?;
            if l != r {
                return Err(bad("sides differ"));
            }
        }
        Rule::Sym => {
            need_rel(Relation::Equiv)?;
            arity(1)?;
            premise(0, Relation::Equiv, r, l)?;
        }
        Rule::Trans => {
            arity(2)?;
            let mid = d.children[0].rhs().clone();
            premise(0, rel, l, &mid)?;
            premise(1, rel, &mid, r)?;
        }
        Rule::Promote => {
            need_rel(Relation::Refine)?;
            arity(1)?;
            premise(0, Relation::Equiv, l, r)?;
        }
        Rule::CongFMap => match (l.node(), r.node()) {
            (Node::FMap { g: g1, arg: a1 }, Node::FMap { g: g2, arg: a2 }) => {
                same_fn(g1, g2).ok_or_else(|| bad("functions differ"))?;
                arity(1)?;
                premise(0, rel, a1, a2)?;
            }
            _ => return Err(bad("expects fmap on both sides")),
        },
        Rule::CongLiftA2 => match (l.node(), r.node()) {
            (
                Node::LiftA2 { f: f1, left: a1, right: b1 },
                Node::LiftA2 { f: f2, left: a2, right: b2 },
            ) => {
                same_fn(f1, f2).ok_or_else(|| bad("functions differ"))?;
                arity(2)?;
                premise(0, rel, a1, a2)?;
                premise(1, rel, b1, b2)?;
            }
            _ => return Err(bad("expects liftA2 on both sides")),
        },
        Rule::CongSelectBy => match (l.node(), r.node()) {
            (
                Node::SelectBy { f: f1, scrutinee: a1, handler: b1 },
                Node::SelectBy { f: f2, scrutinee: a2, handler: b2 },
            ) => {
                same_fn(f1, f2).ok_or_else(|| bad("functions differ"))?;
                arity(2)?;
                premise(0, rel, a1, a2)?;
                premise(1, rel, b1, b2)?;
            }
            _ => return Err(bad("expects selectBy on both sides")),
        },
        Rule::CongBind => match (l.node(), r.node()) {
            (Node::Bind { m: m1, k: k1 }, Node::Bind { m: m2, k: k2 }) => {
                let carrier = m1.ty().carrier();
                arity(1 + carrier.len())?;
                premise(0, rel, m1, m2)?;
                for (i, x) in carrier.iter().enumerate() {
                    let a = table_cont(k1, x)?;
                    let b = table_cont(k2, x)?;
                    premise(i + 1, rel, &a, &b)?;
                }
            }
            _ => return Err(bad("expects bind on both sides")),
        },
        Rule::CongKPlus => match (l.node(), r.node()) {
            (Node::KPlus(a), Node::KPlus(b)) => {
                arity(1)?;
                premise(0, rel, a, b)?;
            }
            _ => return Err(bad("expects kplus on both sides")),
        },
        Rule::CongPlus => match (l.node(), r.node()) {
            (Node::Plus(a1, b1), Node::Plus(a2, b2)) => {
                arity(2)?;
                premise(0, rel, a1, a2)?;
                premise(1, rel, b1, b2)?;
            }
            _ => return Err(bad("expects plus on both sides")),
        },
        Rule::LeftIdentity => {
            // liftA2 f (pure a) b ≅ b  if  ∀y. f a y = y
            let Node::LiftA2 { f, left, right } = l.node() else {
                return Err(bad("expects liftA2 on the left"));
            };
            let Node::Pure(a) = left.node() else {
                return Err(bad("first argument must be pure"));
            };
            if right != r {
                return Err(bad("right side must be the second argument"));
            }
            forall(&[right.ty().clone()], |ys| {
                let got = table_apply(f, &[a.clone(), ys[0].clone()])?;
                Ok(got == ys[0])
            }, fails)?;
        }
        Rule::RightIdentity => {
            // liftA2 f a (pure b) ≅ a  if  ∀x. f x b = x
            let Node::LiftA2 { f, left, right } = l.node() else {
                return Err(bad("expects liftA2 on the left"));
            };
            let Node::Pure(b) = right.node() else {
                return Err(bad("second argument must be pure"));
            };
            if left != r {
                return Err(bad("right side must be the first argument"));
            }
            forall(&[left.ty().clone()], |xs| {
                let got = table_apply(f, &[xs[0].clone(), b.clone()])?;
                Ok(got == xs[0])
            }, fails)?;
        }
        Rule::Commutativity => {
            // liftA2 f a b ≅ liftA2 g b a  if  ∀x y. g y x = f x y
            let (Node::LiftA2 { f, left: a, right: b }, Node::LiftA2 { f: g, left: b2, right: a2 }) =
                (l.node(), r.node())
            else {
                return Err(bad("expects liftA2 on both sides"));
            };
            if a != a2 || b != b2 {
                return Err(bad("arguments are not swapped"));
            }
            forall(&[a.ty().clone(), b.ty().clone()], |xy| {
                let lhs = table_apply(f, &[xy[0].clone(), xy[1].clone()])?;
                let rhs = table_apply(g, &[xy[1].clone(), xy[0].clone()])?;
                Ok(lhs == rhs)
            }, fails)?;
        }
        Rule::Associativity => {
            // liftA2 id (liftA2 f a b) c ≅ liftA2 (flip id) a (liftA2 g b c)
            //   if  ∀x y z. f x y z = g y z x
            let (Node::LiftA2 { f: id1, left: ab, right: c }, Node::LiftA2 { f: id2, left: a2, right: bc }) =
                (l.node(), r.node())
            else {
                return Err(bad("expects liftA2 on both sides"));
            };
            let (Node::LiftA2 { f, left: a, right: b }, Node::LiftA2 { f: g, left: b2, right: c2 }) =
                (ab.node(), bc.node())
            else {
                return Err(bad("expects nested liftA2"));
            };
            if a != a2 || b != b2 || c != c2 {
                return Err(bad("operands differ"));
            }
            // id1 must be application and id2 flipped application.
            forall(id1.domain(), |hz| {
                let got = table_apply(id1, hz)?;
                Ok(hz[0].call(&hz[1]) == Some(&got))
            }, fails)?;
            forall(id2.domain(), |xh| {
                let got = table_apply(id2, xh)?;
                Ok(xh[1].call(&xh[0]) == Some(&got))
            }, fails)?;
            forall(&[a.ty().clone(), b.ty().clone(), c.ty().clone()], |xyz| {
                let fxy = table_apply(f, &[xyz[0].clone(), xyz[1].clone()])?;
                let gyz = table_apply(g, &[xyz[1].clone(), xyz[2].clone()])?;
                Ok(fxy.call(&xyz[2]).is_some() && fxy.call(&xyz[2]) == gyz.call(&xyz[0]))
            }, fails)?;
        }
        Rule::Naturality => {
            // liftA2 p (liftA2 q a b) c ≅ liftA2 f a (liftA2 g b c)
            //   if  ∀x y z. p (q x y) z = f x (g y z)
            let (Node::LiftA2 { f: p, left: ab, right: c }, Node::LiftA2 { f, left: a2, right: bc }) =
                (l.node(), r.node())
            else {
                return Err(bad("expects liftA2 on both sides"));
            };
            let (Node::LiftA2 { f: q, left: a, right: b }, Node::LiftA2 { f: g, left: b2, right: c2 }) =
                (ab.node(), bc.node())
            else {
                return Err(bad("expects nested liftA2"));
            };
            if a != a2 || b != b2 || c != c2 {
                return Err(bad("operands differ"));
            }
            forall(&[a.ty().clone(), b.ty().clone(), c.ty().clone()], |xyz| {
                let qxy = table_apply(q, &[xyz[0].clone(), xyz[1].clone()])?;
                let lhs = table_apply(p, &[qxy, xyz[2].clone()])?;
                let gyz = table_apply(g, &[xyz[1].clone(), xyz[2].clone()])?;
                let rhs = table_apply(f, &[xyz[0].clone(), gyz])?;
                Ok(lhs == rhs)
            }, fails)?;
        }
        Rule::MonadLeftIdentity => {
            // pure v >>= k ≅ k v
            let Node::Bind { m, k } = l.node() else {
                return Err(bad("expects bind on the left"));
            };
            let Node::Pure(v) = m.node() else {
                return Err(bad("scrutinee must be pure"));
            };
            if table_cont(k, v)? != *r {
                return Err(fails(vec![v.clone()]));
            }
        }
        Rule::MonadRightIdentity => {
            // m >>= pure ≅ m
            let Node::Bind { m, k } = l.node() else {
                return Err(bad("expects bind on the left"));
            };
            if m != r {
                return Err(bad("right side must be the scrutinee"));
            }
            for x in m.ty().carrier() {
                let next = table_cont(k, x)?;
                if !matches!(next.node(), Node::Pure(y) if y == x) {
                    return Err(fails(vec![x.clone()]));
                }
            }
        }
        Rule::MonadAssociativity => {
            // (m >>= g) >>= h ≅ m >>= (fun x => g x >>= h)
            let (Node::Bind { m: mg, k: h }, Node::Bind { m: m2, k }) = (l.node(), r.node()) else {
                return Err(bad("expects bind on both sides"));
            };
            let Node::Bind { m, k: g } = mg.node() else {
                return Err(bad("expects a nested bind on the left"));
            };
            if m != m2 {
                return Err(bad("scrutinees differ"));
            }
            table_only(h)?;
            for x in m.ty().carrier() {
                let gx = table_cont(g, x)?;
                let kx = table_cont(k, x)?;
                let ok = matches!(kx.node(), Node::Bind { m: gx2, k: h2 } if *gx2 == gx && h2 == h);
                if !ok {
                    return Err(fails(vec![x.clone()]));
                }
            }
        }
        Rule::SelectInr => {
            // select (inr <$> a) b ≅ a, for any dispatcher f and injection g
            //   with  ∀x. f (g x) = inr x
            let Node::SelectBy { f, scrutinee, .. } = l.node() else {
                return Err(bad("expects selectBy on the left"));
            };
            let Node::FMap { g, arg } = scrutinee.node() else {
                return Err(bad("scrutinee must be an fmap"));
            };
            if arg != r {
                return Err(bad("right side must be the mapped computation"));
            }
            forall(&[arg.ty().clone()], |xs| {
                let gx = table_apply(g, &[xs[0].clone()])?;
                let fgx = table_apply(f, &[gx])?;
                Ok(fgx == Value::Right(Box::new(xs[0].clone())))
            }, fails)?;
        }
        Rule::FunctorIdentity => {
            let Node::FMap { g, arg } = l.node() else {
                return Err(bad("expects fmap on the left"));
            };
            if arg != r {
                return Err(bad("right side must be the argument"));
            }
            forall(&[arg.ty().clone()], |xs| Ok(table_apply(g, xs)? == xs[0]), fails)?;
        }
        Rule::FunctorComposition => {
            // g <$> (h <$> a) ≅ k <$> a  if  ∀x. k x = g (h x)
            let (Node::FMap { g, arg: ha }, Node::FMap { g: k, arg: a2 }) = (l.node(), r.node()) else {
                return Err(bad("expects fmap on both sides"));
            };
            let Node::FMap { g: h, arg: a } = ha.node() else {
                return Err(bad("expects a nested fmap on the left"));
            };
            if a != a2 {
                return Err(bad("arguments differ"));
            }
            forall(&[a.ty().clone()], |xs| {
                let hx = table_apply(h, xs)?;
                Ok(table_apply(g, &[hx])? == table_apply(k, xs)?)
            }, fails)?;
        }
        Rule::Repeat => {
            let Node::KPlus(a) = r.node() else {
                return Err(bad("right side must be kplus"));
            };
            let n = repeat_count(l, a)?.ok_or_else(|| bad("left side is not a repetition"))?;
            if d.n.is_some_and(|want| want != n) {
                return Err(bad(&format!("left side repeats {n} times")));
            }
        }
        Rule::Kplus => {
            need_rel(Relation::Refine)?;
            arity(1)?;
            let Node::KPlus(a) = l.node() else {
                return Err(bad("left side must be kplus"));
            };
            if !matches!(r.node(), Node::KPlus(_)) {
                return Err(bad("right side must be kplus"));
            }
            premise(0, Relation::Refine, a, r)?;
        }
        Rule::PlusCommutativity => match (l.node(), r.node()) {
            (Node::Plus(a, b), Node::Plus(b2, a2)) if a == a2 && b == b2 => {}
            _ => return Err(bad("expects plus a b ≅ plus b a")),
        },
        Rule::PlusAssociativity => {
            let ok = match (l.node(), r.node()) {
                (Node::Plus(a, bc), Node::Plus(ab, c)) => match (bc.node(), ab.node()) {
                    (Node::Plus(b, c1), Node::Plus(a1, b1)) => a == a1 && b == b1 && c == c1,
                    _ => false,
                },
                _ => false,
            };
            if !ok {
                return Err(bad("expects plus a (plus b c) ≅ plus (plus a b) c"));
            }
        }
        Rule::PlusLub => {
            need_rel(Relation::Refine)?;
            arity(2)?;
            let Node::Plus(a, b) = l.node() else {
                return Err(bad("left side must be plus"));
            };
            premise(0, Relation::Refine, a, r)?;
            premise(1, Relation::Refine, b, r)?;
        }
        Rule::LeftPlus => match r.node() {
            Node::Plus(a, _) if a == l => {}
            _ => return Err(bad("expects a ⊑ plus a b")),
        },
        Rule::RightPlus => match r.node() {
            Node::Plus(_, b) if b == l => {}
            _ => return Err(bad("expects b ⊑ plus a b")),
        },
    }
    Ok(())
}

fn same_fn(a: &FnRef, b: &FnRef) -> Option<()> {
    (std::sync::Arc::ptr_eq(a, b) || **a == **b).then_some(())
}

fn opaque(name: &str) -> Rejection {
    Rejection::OpaqueFunctionInSideCondition(name.to_string())
}

fn table_apply(f: &FnRef, args: &[Value]) -> Result<Value, Rejection> {
    match f.apply_table(args) {
        Ok(Some(v)) => Ok(v),
        Ok(None) => Err(Rejection::Malformed {
            rule: Rule::Refl,
            msg: format!("{} is undefined at {args:?}", f.name()),
        }),
        Err(TermError::OpaqueFunction(name)) => Err(opaque(&name)),
        Err(e) => Err(Rejection::Malformed {
            rule: Rule::Refl,
            msg: e.to_string(),
        }),
    }
}

fn table_only(k: &Continuation) -> Result<(), Rejection> {
    match k {
        Continuation::Table(_) => Ok(()),
        Continuation::Opaque { name, .. } => Err(opaque(name)),
    }
}

fn table_cont(k: &Continuation, x: &Value) -> Result<Term, Rejection> {
    table_only(k)?;
    k.apply(x).ok_or_else(|| Rejection::Malformed {
        rule: Rule::CongBind,
        msg: format!("continuation undefined at {x}"),
    })
}

/// Runs `cond` on every assignment; the first failing one is reported.
fn forall(
    types: &[TypeRef],
    mut cond: impl FnMut(&[Value]) -> Result<bool, Rejection>,
    fails: impl Fn(Vec<Value>) -> Rejection,
) -> Result<(), Rejection> {
    for_each_assignment(types, |vs| match cond(vs) {
        Ok(true) => Ok(()),
        Ok(false) => Err(fails(vs.to_vec())),
        Err(e) => Err(e),
    })
}

/// If `t` is `repeat a n` (n copies sequenced with `liftA2 (fun _ x => x)`
/// or `>>`), returns `n`.
pub(crate) fn repeat_count(t: &Term, a: &Term) -> Result<Option<usize>, Rejection> {
    if t == a {
        return Ok(Some(1));
    }
    match t.node() {
        Node::LiftA2 { f, left, right } if left == a => {
            let mut is_second = true;
            for_each_assignment(f.domain(), |xy| {
                if table_apply(f, xy)? != xy[1] {
                    is_second = false;
                }
                Ok::<(), Rejection>(())
            })?;
            if !is_second {
                return Ok(None);
            }
            Ok(repeat_count(right, a)?.map(|n| n + 1))
        }
        Node::Bind { m, k } if m == a => {
            table_only(k)?;
            let table = k.table().expect("checked");
            let mut branches = table.values();
            let first = branches.next().expect("non-empty carrier");
            if branches.any(|b| b != first) {
                return Ok(None);
            }
            Ok(repeat_count(first, a)?.map(|n| n + 1))
        }
        _ => Ok(None),
    }
}
