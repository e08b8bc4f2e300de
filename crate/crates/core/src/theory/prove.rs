//! Bounded backward proof search.
//!
//! The search is incomplete: `None` means "not found within the budget",
//! never "false". Every returned derivation is re-checked before it leaves.

use std::collections::HashSet;
use std::sync::Arc;

use super::check::{check_derivation, check_step};
use super::{DerivRef, Derivation, Judgment, Relation, Rule, Theory};
use crate::func::{FnBody, Func};
use crate::term::{Continuation, Node, Term};

/// Searches for a derivation of `j` of height at most `depth`.
pub fn prove_bounded(th: &Theory, j: &Judgment, depth: usize) -> Option<DerivRef> {
    let mut p = Prover {
        th,
        failed: HashSet::new(),
    };
    let d = p.search(j.rel, &j.lhs, &j.rhs, depth)?;
    check_derivation(th, &d).is_accepted().then_some(d)
}

struct Prover<'a> {
    th: &'a Theory,
    failed: HashSet<(Relation, String, String, usize)>,
}

impl Prover<'_> {
    fn admits(&self, d: &Derivation) -> bool {
        self.th.has(d.rule) && self.th.relations().contains(&d.rel()) && check_step(d).is_ok()
    }

    /// Lifts an equivalence to the requested relation (one extra level for
    /// `Promote`).
    fn lift(&self, rel: Relation, d: DerivRef) -> Option<DerivRef> {
        match rel {
            Relation::Equiv => Some(d),
            Relation::Refine if self.th.has(Rule::Promote) => Some(Derivation::promote(&d)),
            Relation::Refine => None,
        }
    }

    fn search(&mut self, rel: Relation, l: &Term, r: &Term, depth: usize) -> Option<DerivRef> {
        if depth == 0 || !self.th.relations().contains(&rel) {
            return None;
        }
        let key = (rel, l.to_string(), r.to_string(), depth);
        if self.failed.contains(&key) {
            return None;
        }
        let found = self.search_uncached(rel, l, r, depth);
        if found.is_none() {
            self.failed.insert(key);
        }
        found
    }

    fn search_uncached(&mut self, rel: Relation, l: &Term, r: &Term, depth: usize) -> Option<DerivRef> {
        if l == r && self.th.has(Rule::Refl) {
            return Some(Derivation::refl(rel, l));
        }
        let extra = usize::from(rel == Relation::Refine);
        // axioms, directly and reversed
        for &rule in self.th.rules() {
            if rule.is_refine_axiom() && rel == Relation::Refine {
                let d = Derivation::axiom(rel, rule, l, r);
                if self.admits(&d) {
                    return Some(d);
                }
            }
            if rule.is_equiv_axiom() && depth > extra {
                let d = Derivation::axiom(Relation::Equiv, rule, l, r);
                if self.admits(&d) {
                    return self.lift(rel, d);
                }
                if depth > extra + 1 && self.th.has(Rule::Sym) {
                    let d = Derivation::axiom(Relation::Equiv, rule, r, l);
                    if self.admits(&d) {
                        return self.lift(rel, Derivation::sym(&d));
                    }
                }
            }
        }
        if depth < 2 {
            return None;
        }
        if let Some(d) = self.congruence(rel, l, r, depth) {
            return Some(d);
        }
        if rel == Relation::Refine {
            if let Some(d) = self.refinement_structure(l, r, depth) {
                return Some(d);
            }
        }
        // one rewrite step at the root of either side, then recurse
        if self.th.has(Rule::Trans) {
            for step in self.rewrites(l) {
                if step.depth() + 1 + extra > depth {
                    continue;
                }
                let Some(step) = self.lift(rel, step) else { continue };
                if let Some(rest) = self.search(rel, step.rhs(), r, depth - 1) {
                    return Some(Derivation::trans(&step, &rest));
                }
            }
            if self.th.has(Rule::Sym) {
                for step in self.rewrites(r) {
                    if step.depth() + 2 + extra > depth {
                        continue;
                    }
                    let Some(back) = self.lift(rel, Derivation::sym(&step)) else { continue };
                    if let Some(first) = self.search(rel, l, step.rhs(), depth - 1) {
                        return Some(Derivation::trans(&first, &back));
                    }
                }
            }
        }
        None
    }

    fn congruence(&mut self, rel: Relation, l: &Term, r: &Term, depth: usize) -> Option<DerivRef> {
        let (rule, pairs): (Rule, Vec<(Term, Term)>) = match (l.node(), r.node()) {
            (Node::FMap { g: g1, arg: a1 }, Node::FMap { g: g2, arg: a2 }) if g1 == g2 => {
                (Rule::CongFMap, vec![(a1.clone(), a2.clone())])
            }
            (
                Node::LiftA2 { f: f1, left: a1, right: b1 },
                Node::LiftA2 { f: f2, left: a2, right: b2 },
            ) if f1 == f2 => (
                Rule::CongLiftA2,
                vec![(a1.clone(), a2.clone()), (b1.clone(), b2.clone())],
            ),
            (
                Node::SelectBy { f: f1, scrutinee: a1, handler: b1 },
                Node::SelectBy { f: f2, scrutinee: a2, handler: b2 },
            ) if f1 == f2 => (
                Rule::CongSelectBy,
                vec![(a1.clone(), a2.clone()), (b1.clone(), b2.clone())],
            ),
            (Node::Bind { m: m1, k: k1 }, Node::Bind { m: m2, k: k2 }) => {
                let (t1, t2) = (k1.table()?, k2.table()?);
                let mut pairs = vec![(m1.clone(), m2.clone())];
                for x in m1.ty().carrier() {
                    pairs.push((t1.get(x)?.clone(), t2.get(x)?.clone()));
                }
                (Rule::CongBind, pairs)
            }
            (Node::KPlus(a), Node::KPlus(b)) => (Rule::CongKPlus, vec![(a.clone(), b.clone())]),
            (Node::Plus(a1, b1), Node::Plus(a2, b2)) => (
                Rule::CongPlus,
                vec![(a1.clone(), a2.clone()), (b1.clone(), b2.clone())],
            ),
            _ => return None,
        };
        if !self.th.has(rule) {
            return None;
        }
        let mut children = Vec::with_capacity(pairs.len());
        for (a, b) in &pairs {
            children.push(self.search(rel, a, b, depth - 1)?);
        }
        Some(Derivation::new(rel, l, r, rule, children))
    }

    fn refinement_structure(&mut self, l: &Term, r: &Term, depth: usize) -> Option<DerivRef> {
        if let Node::Plus(a, b) = l.node() {
            if self.th.has(Rule::PlusLub) {
                if let Some(da) = self.search(Relation::Refine, a, r, depth - 1) {
                    if let Some(db) = self.search(Relation::Refine, b, r, depth - 1) {
                        return Some(Derivation::new(Relation::Refine, l, r, Rule::PlusLub, vec![da, db]));
                    }
                }
            }
        }
        if let (Node::KPlus(a), Node::KPlus(_)) = (l.node(), r.node()) {
            if self.th.has(Rule::Kplus) {
                if let Some(d) = self.search(Relation::Refine, a, r, depth - 1) {
                    return Some(Derivation::new(Relation::Refine, l, r, Rule::Kplus, vec![d]));
                }
            }
        }
        None
    }

    /// Equivalence steps `t ≅ t'` at the root of `t`, each admitted by the
    /// theory.
    fn rewrites(&self, t: &Term) -> Vec<DerivRef> {
        let mut out = Vec::new();
        let mut push = |rule: Rule, to: Term, sym: bool| {
            let d = if sym {
                Derivation::sym(&Derivation::axiom(Relation::Equiv, rule, &to, t))
            } else {
                Derivation::axiom(Relation::Equiv, rule, t, &to)
            };
            let ok = if sym {
                self.th.has(Rule::Sym) && self.admits(&d.children[0])
            } else {
                self.admits(&d)
            };
            if ok {
                out.push(d);
            }
        };
        match t.node() {
            Node::LiftA2 { f, left, right } => {
                if let Ok(g) = Func::flip(f) {
                    let swapped = Term::new(
                        t.ty().clone(),
                        Node::LiftA2 {
                            f: g,
                            left: right.clone(),
                            right: left.clone(),
                        },
                    );
                    push(Rule::Commutativity, swapped, false);
                }
                if matches!(right.node(), Node::Pure(_)) {
                    push(Rule::RightIdentity, left.clone(), false);
                }
                if matches!(left.node(), Node::Pure(_)) {
                    push(Rule::LeftIdentity, right.clone(), false);
                }
            }
            Node::FMap { g, arg } => {
                push(Rule::FunctorIdentity, arg.clone(), false);
                if let Node::FMap { g: h, arg: a } = arg.node() {
                    if let (FnBody::Table(_), FnBody::Table(_)) = (g.body(), h.body()) {
                        let (g2, h2) = (g.clone(), h.clone());
                        if let Ok(k) = Func::tabulate(
                            format!("{}.{}", g.name(), h.name()),
                            h.domain().to_vec(),
                            g.codomain().clone(),
                            move |x| g2.apply(&[h2.apply(x).unwrap()]).unwrap(),
                        ) {
                            let to = Term::new(t.ty().clone(), Node::FMap { g: k, arg: a.clone() });
                            push(Rule::FunctorComposition, to, false);
                        }
                    }
                }
            }
            Node::SelectBy { scrutinee, .. } => {
                if let Node::FMap { arg, .. } = scrutinee.node() {
                    push(Rule::SelectInr, arg.clone(), false);
                }
            }
            Node::Bind { m, k } => {
                if let Node::Pure(v) = m.node() {
                    if let Some(next) = k.table().and_then(|tb| tb.get(v)) {
                        push(Rule::MonadLeftIdentity, next.clone(), false);
                    }
                }
                push(Rule::MonadRightIdentity, m.clone(), false);
                if let (Node::Bind { m: m0, k: g }, Some(_)) = (m.node(), k.table()) {
                    if let Some(gt) = g.table() {
                        let inner = Continuation::Table(Arc::new(
                            gt.iter()
                                .map(|(x, gx)| {
                                    let b = Term::new(t.ty().clone(), Node::Bind { m: gx.clone(), k: k.clone() });
                                    (x.clone(), b)
                                })
                                .collect(),
                        ));
                        let to = Term::new(t.ty().clone(), Node::Bind { m: m0.clone(), k: inner });
                        push(Rule::MonadAssociativity, to, false);
                    }
                }
            }
            Node::Plus(a, b) => {
                push(
                    Rule::PlusCommutativity,
                    Term::new(t.ty().clone(), Node::Plus(b.clone(), a.clone())),
                    false,
                );
                if let Node::Plus(b1, c) = b.node() {
                    let ab = Term::new(t.ty().clone(), Node::Plus(a.clone(), b1.clone()));
                    push(
                        Rule::PlusAssociativity,
                        Term::new(t.ty().clone(), Node::Plus(ab, c.clone())),
                        false,
                    );
                }
                if let Node::Plus(a1, b1) = a.node() {
                    let bc = Term::new(t.ty().clone(), Node::Plus(b1.clone(), b.clone()));
                    push(
                        Rule::PlusAssociativity,
                        Term::new(t.ty().clone(), Node::Plus(a1.clone(), bc)),
                        true,
                    );
                }
            }
            _ => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::stdlib::andb;
    use crate::term::{EffectOp, EffectSig, NodeKind, Vocabulary};
    use crate::theory::TheoryId;
    use crate::value::{FiniteType, Value};

    fn vocab() -> Vocabulary {
        let sig = EffectSig::new(
            "DataEff",
            vec![EffectOp::fixed(
                "GetData",
                vec![FiniteType::symbols("var", &["x", "y"])],
                FiniteType::bool(),
            )],
        )
        .unwrap();
        Vocabulary::of(&[NodeKind::Pure, NodeKind::FMap, NodeKind::LiftA2])
            .with_effect(sig)
            .unwrap()
    }

    fn get(v: &Vocabulary, name: &str) -> Term {
        v.effect("DataEff", "GetData", vec![Value::sym(name)]).unwrap()
    }

    fn equiv(l: &Term, r: &Term) -> Judgment {
        Judgment {
            rel: Relation::Equiv,
            lhs: l.clone(),
            rhs: r.clone(),
        }
    }

    #[test]
    fn right_identity_proves_and_true() {
        let v = vocab();
        let x = get(&v, "x");
        let t = v.pure(&FiniteType::bool(), Value::Bool(true)).unwrap();
        let conj = v.lift_a2(&andb(), &x, &t).unwrap();
        let d = prove_bounded(&Theory::of(&[TheoryId::Statically]), &equiv(&x, &conj), 3).unwrap();
        assert_eq!(d.rule, Rule::Sym);
        assert_eq!(d.children[0].rule, Rule::RightIdentity);
    }

    #[test]
    fn commutativity_needs_the_parallel_theory() {
        let v = vocab();
        let (x, y) = (get(&v, "x"), get(&v, "y"));
        let xy = v.lift_a2(&andb(), &x, &y).unwrap();
        let yx = v.lift_a2(&andb(), &y, &x).unwrap();
        let j = equiv(&xy, &yx);
        assert!(prove_bounded(&Theory::of(&[TheoryId::StaticallyInParallel]), &j, 2).is_some());
        assert!(prove_bounded(&Theory::of(&[TheoryId::Statically]), &j, 4).is_none());
    }

    #[test]
    fn idempotence_is_not_derivable() {
        let v = vocab();
        let x = get(&v, "x");
        let xx = v.lift_a2(&andb(), &x, &x).unwrap();
        for id in [TheoryId::Statically, TheoryId::StaticallyInParallel] {
            assert!(prove_bounded(&Theory::of(&[id]), &equiv(&x, &xx), 6).is_none());
        }
    }
}
