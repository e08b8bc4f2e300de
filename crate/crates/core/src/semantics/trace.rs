//! Trace enumeration.
//!
//! Two engines share the effect model: a depth-first enumerator that streams
//! behaviors (with early exit), and a memoized set-reachability engine guided
//! by a trie of candidate traces, used to decide membership of many
//! behaviors at once without enumerating the right-hand side.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;
use std::sync::Arc;

use super::{mem_append, mem_get, mem_set, Behavior, Event, OutcomeModel, Store, TraceSet};
use crate::error::SemError;
use crate::func::FnRef;
use crate::term::{Node, Term};
use crate::value::{TypeRef, Value};

/// Behaviors of a term are checked against the other side in chunks of this
/// many.
const CHUNK: usize = 4096;

fn apply(f: &FnRef, args: &[Value]) -> Result<Value, SemError> {
    f.apply(args).ok_or_else(|| SemError::UndefinedFunction {
        name: f.name().to_string(),
        args: args.to_vec(),
    })
}

fn call_map(h: &Value, y: &Value) -> Result<Value, SemError> {
    h.call(y).cloned().ok_or_else(|| SemError::UndefinedFunction {
        name: h.to_string(),
        args: vec![y.clone()],
    })
}

fn continue_at(k: &crate::term::Continuation, x: &Value, m: &Term) -> Result<Term, SemError> {
    k.apply(x).ok_or_else(|| SemError::OutsideCarrier {
        value: x.clone(),
        ty: m.ty().name().to_string(),
    })
}

fn check_member(ty: &TypeRef, v: &Value) -> Result<(), SemError> {
    if ty.contains(v) {
        Ok(())
    } else {
        Err(SemError::OutsideCarrier {
            value: v.clone(),
            ty: ty.name().to_string(),
        })
    }
}

/// All `(store', event?, result)` outcomes of one effect call.
fn effect_steps(
    model: &OutcomeModel,
    t: &Term,
    store: &Store,
) -> Result<Vec<(Store, Option<Event>, Value)>, SemError> {
    let Node::Effect { sig, op, args } = t.node() else {
        unreachable!("effect_steps on a non-effect node")
    };
    let event = |outcome: &Value| Event {
        sig: sig.name().to_string(),
        op: op.clone(),
        args: args.clone(),
        outcome: outcome.clone(),
    };
    if model.is_memory(sig.name()) {
        let (next, v) = match (op.as_str(), args.as_slice()) {
            ("get", [r]) => {
                let v = mem_get(store, r)?;
                check_member(t.ty(), &v)?;
                (store.clone(), v)
            }
            ("set", [r, v]) => {
                let mut s = (**store).clone();
                mem_set(&mut s, r, v.clone())?;
                (Arc::new(s), Value::Unit)
            }
            ("append", [r, v]) => {
                let mut s = (**store).clone();
                mem_append(&mut s, r, v.clone())?;
                (Arc::new(s), Value::Unit)
            }
            _ => {
                return Err(SemError::UnknownOperation {
                    sig: sig.name().to_string(),
                    op: op.clone(),
                })
            }
        };
        let ev = model.memory_observable().then(|| event(&v));
        return Ok(vec![(next, ev, v)]);
    }
    let outcomes = match model.outcomes(sig.name(), op) {
        Some(list) => list,
        None => t.ty().carrier(),
    };
    outcomes
        .iter()
        .map(|o| {
            check_member(t.ty(), o)?;
            Ok((store.clone(), Some(event(o)), o.clone()))
        })
        .collect()
}

enum Halt {
    Stop,
    Err(SemError),
}

impl From<SemError> for Halt {
    fn from(e: SemError) -> Self {
        Halt::Err(e)
    }
}

type Sink<'a> = dyn FnMut(&Store, &mut Vec<Event>, Value) -> Result<(), Halt> + 'a;

struct Dfs<'m> {
    model: &'m OutcomeModel,
    bound: usize,
    powerset: bool,
}

impl Dfs<'_> {
    fn run(&self, t: &Term, s: &Store, tr: &mut Vec<Event>, k: &mut Sink) -> Result<(), Halt> {
        match t.node() {
            Node::Pure(v) => k(s, tr, v.clone()),
            Node::Effect { .. } => {
                for (s1, ev, v) in effect_steps(self.model, t, s)? {
                    let pushed = ev.is_some();
                    if let Some(e) = ev {
                        tr.push(e);
                    }
                    let r = k(&s1, tr, v);
                    if pushed {
                        tr.pop();
                    }
                    r?;
                }
                Ok(())
            }
            Node::FMap { g, arg } => self.run(arg, s, tr, &mut |s1, tr, x| {
                let y = apply(g, &[x])?;
                k(s1, tr, y)
            }),
            Node::LiftA2 { f, left, right } => {
                self.run(left, s, tr, &mut |s1, tr, x| {
                    self.run(right, s1, tr, &mut |s2, tr, y| {
                        let r = apply(f, &[x.clone(), y])?;
                        k(s2, tr, r)
                    })
                })?;
                if self.powerset {
                    self.run(right, s, tr, &mut |s1, tr, y| {
                        self.run(left, s1, tr, &mut |s2, tr, x| {
                            let r = apply(f, &[x, y.clone()])?;
                            k(s2, tr, r)
                        })
                    })?;
                }
                Ok(())
            }
            Node::SelectBy {
                f,
                scrutinee,
                handler,
            } => self.run(scrutinee, s, tr, &mut |s1, tr, x| match apply(f, &[x])? {
                Value::Right(r) => k(s1, tr, *r),
                Value::Left(h) => self.run(handler, s1, tr, &mut |s2, tr, y| {
                    let r = call_map(&h, &y)?;
                    k(s2, tr, r)
                }),
                other => Err(Halt::Err(SemError::OutsideCarrier {
                    value: other,
                    ty: f.codomain().name().to_string(),
                })),
            }),
            Node::Bind { m, k: cont } => self.run(m, s, tr, &mut |s1, tr, x| {
                let next = continue_at(cont, &x, m)?;
                self.run(&next, s1, tr, k)
            }),
            Node::Plus(a, b) => {
                self.run(a, s, tr, k)?;
                self.run(b, s, tr, k)
            }
            Node::KPlus(a) => self.kplus(a, s, tr, self.bound, k),
        }
    }

    fn kplus(&self, a: &Term, s: &Store, tr: &mut Vec<Event>, left: usize, k: &mut Sink) -> Result<(), Halt> {
        self.run(a, s, tr, &mut |s1, tr, x| {
            k(s1, tr, x)?;
            if left > 1 {
                self.kplus(a, s1, tr, left - 1, k)
            } else {
                Ok(())
            }
        })
    }
}

/// Streams every behavior (possibly with repeats) to `visit`; stops early
/// when `visit` returns `false`.
pub fn for_each_behavior(
    t: &Term,
    model: &OutcomeModel,
    kplus_bound: usize,
    powerset: bool,
    mut visit: impl FnMut(Behavior) -> Result<bool, SemError>,
) -> Result<(), SemError> {
    assert!(kplus_bound >= 1, "kplus bound must be at least 1");
    let dfs = Dfs {
        model,
        bound: kplus_bound,
        powerset,
    };
    let mut trace = Vec::new();
    let r = dfs.run(t, &model.initial_store(), &mut trace, &mut |_, tr, v| {
        let b = Behavior {
            trace: tr.clone(),
            result: v,
        };
        match visit(b) {
            Ok(true) => Ok(()),
            Ok(false) => Err(Halt::Stop),
            Err(e) => Err(Halt::Err(e)),
        }
    });
    match r {
        Ok(()) | Err(Halt::Stop) => Ok(()),
        Err(Halt::Err(e)) => Err(e),
    }
}

fn collect(t: &Term, model: &OutcomeModel, bound: usize, powerset: bool) -> Result<TraceSet, SemError> {
    let mut out = TraceSet::new();
    for_each_behavior(t, model, bound, powerset, |b| {
        out.insert(b);
        Ok(true)
    })?;
    Ok(out)
}

/// Sequential trace semantics: `liftA2` runs its left operand first.
pub fn trace_sem(t: &Term, model: &OutcomeModel, kplus_bound: usize) -> Result<TraceSet, SemError> {
    collect(t, model, kplus_bound, false)
}

/// The powerset transformer: each `liftA2` also runs its right operand
/// first (two whole-subterm orders, no finer interleaving).
pub fn powerset_interpret(t: &Term, model: &OutcomeModel, kplus_bound: usize) -> Result<TraceSet, SemError> {
    collect(t, model, kplus_bound, true)
}

/// Set equality of the powerset interpretations.
pub fn oracle_equiv(t1: &Term, t2: &Term, model: &OutcomeModel, bound: usize) -> Result<bool, SemError> {
    Ok(powerset_interpret(t1, model, bound)? == powerset_interpret(t2, model, bound)?)
}

/// A behavior of `t1` (at `bound_l`) that `t2` (at `bound_r`) lacks, under
/// sequential trace semantics.
pub fn refinement_witness(
    t1: &Term,
    t2: &Term,
    model: &OutcomeModel,
    bound_l: usize,
    bound_r: usize,
) -> Result<Option<Behavior>, SemError> {
    let mut seen = HashSet::new();
    let mut chunk = Vec::new();
    let mut witness = None;
    let mut limit = 64;
    let flush = |chunk: &mut Vec<Behavior>| -> Result<Option<Behavior>, SemError> {
        let verdicts = Membership::check(t2, model, bound_r, false, chunk)?;
        let missing = chunk
            .iter()
            .zip(verdicts)
            .find(|(_, ok)| !ok)
            .map(|(b, _)| b.clone());
        chunk.clear();
        Ok(missing)
    };
    for_each_behavior(t1, model, bound_l, false, |b| {
        if seen.insert(b.clone()) {
            chunk.push(b);
            // small first chunks find early witnesses before deep enumeration
            if chunk.len() >= limit {
                limit = (limit * 2).min(CHUNK);
                witness = flush(&mut chunk)?;
                return Ok(witness.is_none());
            }
        }
        Ok(true)
    })?;
    if witness.is_none() && !chunk.is_empty() {
        witness = flush(&mut chunk)?;
    }
    Ok(witness)
}

/// `trace_sem(t1)@bound_l ⊆ trace_sem(t2)@bound_r`.
pub fn oracle_refines(
    t1: &Term,
    t2: &Term,
    model: &OutcomeModel,
    bound_l: usize,
    bound_r: usize,
) -> Result<bool, SemError> {
    Ok(refinement_witness(t1, t2, model, bound_l, bound_r)?.is_none())
}

#[derive(Default)]
struct Trie {
    children: Vec<HashMap<Event, usize>>,
}

impl Trie {
    fn insert(&mut self, trace: &[Event]) -> usize {
        if self.children.is_empty() {
            self.children.push(HashMap::new());
        }
        let mut node = 0;
        for e in trace {
            node = match self.children[node].get(e) {
                Some(&n) => n,
                None => {
                    let n = self.children.len();
                    self.children.push(HashMap::new());
                    self.children[node].insert(e.clone(), n);
                    n
                }
            };
        }
        node
    }

    fn step(&self, node: usize, e: &Event) -> Option<usize> {
        self.children[node].get(e).copied()
    }
}

type Reach = Rc<Vec<(Store, usize, Value)>>;

/// Trie-guided membership: which of a batch of behaviors a term has.
pub struct Membership<'m> {
    model: &'m OutcomeModel,
    bound: usize,
    powerset: bool,
    trie: Trie,
    /// Keyed by term address; the term is kept alive alongside.
    memo: HashMap<(usize, Store, usize), (Term, Reach)>,
}

impl<'m> Membership<'m> {
    /// For each behavior, whether `t` exhibits it.
    pub fn check(
        t: &Term,
        model: &'m OutcomeModel,
        bound: usize,
        powerset: bool,
        behaviors: &[Behavior],
    ) -> Result<Vec<bool>, SemError> {
        let mut m = Membership {
            model,
            bound,
            powerset,
            trie: Trie::default(),
            memo: HashMap::new(),
        };
        let ends: Vec<usize> = behaviors.iter().map(|b| m.trie.insert(&b.trace)).collect();
        if behaviors.is_empty() {
            return Ok(vec![]);
        }
        let reached = m.reach(t, &model.initial_store(), 0)?;
        let finals: HashSet<(usize, &Value)> = reached.iter().map(|(_, n, v)| (*n, v)).collect();
        Ok(behaviors
            .iter()
            .zip(ends)
            .map(|(b, n)| finals.contains(&(n, &b.result)))
            .collect())
    }

    fn reach(&mut self, t: &Term, s: &Store, node: usize) -> Result<Reach, SemError> {
        let key = (t.addr(), s.clone(), node);
        if let Some((_, r)) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        let mut out: Vec<(Store, usize, Value)> = Vec::new();
        match t.node() {
            Node::Pure(v) => out.push((s.clone(), node, v.clone())),
            Node::Effect { .. } => {
                for (s1, ev, v) in effect_steps(self.model, t, s)? {
                    let n1 = match &ev {
                        Some(e) => match self.trie.step(node, e) {
                            Some(n) => n,
                            None => continue,
                        },
                        None => node,
                    };
                    out.push((s1, n1, v));
                }
            }
            Node::FMap { g, arg } => {
                for (s1, n1, x) in self.reach(arg, s, node)?.iter() {
                    out.push((s1.clone(), *n1, apply(g, &[x.clone()])?));
                }
            }
            Node::LiftA2 { f, left, right } => {
                for (s1, n1, x) in self.reach(left, s, node)?.iter() {
                    for (s2, n2, y) in self.reach(right, s1, *n1)?.iter() {
                        out.push((s2.clone(), *n2, apply(f, &[x.clone(), y.clone()])?));
                    }
                }
                if self.powerset {
                    for (s1, n1, y) in self.reach(right, s, node)?.iter() {
                        for (s2, n2, x) in self.reach(left, s1, *n1)?.iter() {
                            out.push((s2.clone(), *n2, apply(f, &[x.clone(), y.clone()])?));
                        }
                    }
                }
            }
            Node::SelectBy {
                f,
                scrutinee,
                handler,
            } => {
                for (s1, n1, x) in self.reach(scrutinee, s, node)?.iter() {
                    match apply(f, &[x.clone()])? {
                        Value::Right(r) => out.push((s1.clone(), *n1, *r)),
                        Value::Left(h) => {
                            for (s2, n2, y) in self.reach(handler, s1, *n1)?.iter() {
                                out.push((s2.clone(), *n2, call_map(&h, y)?));
                            }
                        }
                        other => {
                            return Err(SemError::OutsideCarrier {
                                value: other,
                                ty: f.codomain().name().to_string(),
                            })
                        }
                    }
                }
            }
            Node::Bind { m, k } => {
                for (s1, n1, x) in self.reach(m, s, node)?.iter() {
                    let next = continue_at(k, x, m)?;
                    out.extend(self.reach(&next, s1, *n1)?.iter().cloned());
                }
            }
            Node::Plus(a, b) => {
                out.extend(self.reach(a, s, node)?.iter().cloned());
                out.extend(self.reach(b, s, node)?.iter().cloned());
            }
            Node::KPlus(a) => {
                let first = self.reach(a, s, node)?;
                let mut all: HashSet<(Store, usize, Value)> = first.iter().cloned().collect();
                // configurations reached after each round, deduplicated
                let mut frontier: BTreeMap<(usize, Store), ()> =
                    first.iter().map(|(s1, n1, _)| ((*n1, s1.clone()), ())).collect();
                for _ in 1..self.bound {
                    let mut next = BTreeMap::new();
                    for (n1, s1) in frontier.keys() {
                        for item in self.reach(a, s1, *n1)?.iter() {
                            next.insert((item.1, item.0.clone()), ());
                            all.insert(item.clone());
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
                out.extend(all);
            }
        }
        let mut seen = HashSet::new();
        out.retain(|item| seen.insert(item.clone()));
        let r = Rc::new(out);
        self.memo.insert(key, (t.clone(), r.clone()));
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::stdlib::{andb, orb, second};
    use crate::term::{Continuation, EffectOp, NodeKind, Vocabulary};
    use crate::value::FiniteType;
    use proptest::prelude::*;

    fn vocab() -> Vocabulary {
        let sig = crate::term::EffectSig::new(
            "Coin",
            vec![
                EffectOp::fixed("flip", vec![], FiniteType::bool()),
                EffectOp::fixed("tell", vec![FiniteType::bool()], FiniteType::unit()),
            ],
        )
        .unwrap();
        Vocabulary::of(&[
            NodeKind::Pure,
            NodeKind::LiftA2,
            NodeKind::Bind,
            NodeKind::Plus,
            NodeKind::KPlus,
        ])
        .with_effect(sig)
        .unwrap()
    }

    fn flip(v: &Vocabulary) -> Term {
        v.effect("Coin", "flip", vec![]).unwrap()
    }

    #[test]
    fn two_flips_have_four_behaviors() {
        let v = vocab();
        let t = v.lift_a2(&andb(), &flip(&v), &flip(&v)).unwrap();
        let ts = trace_sem(&t, &OutcomeModel::fresh(), 1).unwrap();
        assert_eq!(ts.len(), 4);
        assert_eq!(ts.iter().filter(|b| b.result == Value::Bool(true)).count(), 1);
    }

    #[test]
    fn powerset_adds_the_reverse_order() {
        let v = vocab();
        let tell = |b| v.effect("Coin", "tell", vec![Value::Bool(b)]).unwrap();
        let t = v.lift_a2(&second(&FiniteType::unit(), &FiniteType::unit()), &tell(true), &tell(false)).unwrap();
        let m = OutcomeModel::fresh();
        assert_eq!(trace_sem(&t, &m, 1).unwrap().len(), 1);
        let p = powerset_interpret(&t, &m, 1).unwrap();
        assert_eq!(p.len(), 2);
        let swapped = v.lift_a2(&crate::func::Func::flip(&second(&FiniteType::unit(), &FiniteType::unit())).unwrap(), &tell(false), &tell(true)).unwrap();
        assert!(oracle_equiv(&t, &swapped, &m, 1).unwrap());
        assert!(!oracle_equiv(&t, &tell(true), &m, 1).unwrap());
    }

    #[test]
    fn empty_outcomes_prune_and_refinement_witness() {
        let v = vocab();
        let t = v.plus(&flip(&v), &v.pure(&FiniteType::bool(), Value::Bool(true)).unwrap()).unwrap();
        let m = OutcomeModel::fresh().with_outcomes("Coin", "flip", vec![]);
        assert_eq!(trace_sem(&t, &m, 1).unwrap().len(), 1);
        let f = flip(&v);
        let p = v.pure(&FiniteType::bool(), Value::Bool(true)).unwrap();
        let w = refinement_witness(&f, &p, &OutcomeModel::fresh(), 1, 1).unwrap();
        assert!(w.is_some());
        assert!(oracle_refines(&p, &t, &OutcomeModel::fresh(), 1, 1).unwrap());
    }

    #[test]
    fn kplus_bound_counts_repetitions() {
        let v = vocab();
        let t = v.kplus(&flip(&v)).unwrap();
        let m = OutcomeModel::fresh();
        // 2 + 4 + 8 traces of length 1..=3
        assert_eq!(trace_sem(&t, &m, 3).unwrap().len(), 14);
        assert!(oracle_refines(&v.seq(&flip(&v), &flip(&v)).unwrap(), &t, &m, 1, 2).unwrap());
        assert!(!oracle_refines(&v.seq(&flip(&v), &flip(&v)).unwrap(), &t, &m, 1, 1).unwrap());
    }

    #[test]
    fn memory_threads_the_store() {
        let sig = crate::term::EffectSig::new(
            "Mem",
            vec![EffectOp::polymorphic("get"), EffectOp::polymorphic("set")],
        )
        .unwrap();
        let v = Vocabulary::of(&[NodeKind::Pure, NodeKind::Bind]).with_effect(sig).unwrap();
        let b = FiniteType::bool();
        let set = v.effect_typed("Mem", "set", vec![Value::sym("x"), Value::Bool(true)], &FiniteType::unit()).unwrap();
        let get = v.effect_typed("Mem", "get", vec![Value::sym("x")], &b).unwrap();
        let t = v.seq(&set, &get).unwrap();
        let m = OutcomeModel::fresh()
            .with_memory("Mem")
            .with_store([("x".to_string(), Value::Bool(false))].into());
        let ts = trace_sem(&t, &m, 1).unwrap();
        assert_eq!(ts.to_lines(), "[] => true\n");
        let seen = trace_sem(&t, &m.clone().observe_memory(true), 1).unwrap();
        assert_eq!(seen.iter().next().unwrap().trace.len(), 2);
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(0u8).prop_map(|_| flip(&vocab())),
            any::<bool>().prop_map(|b| vocab().pure(&FiniteType::bool(), Value::Bool(b)).unwrap()),
            any::<bool>().prop_map(|b| {
                let v = vocab();
                v.seq(&v.effect("Coin", "tell", vec![Value::Bool(b)]).unwrap(), &v.pure(&FiniteType::bool(), Value::Bool(b)).unwrap()).unwrap()
            }),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| vocab().lift_a2(&orb(), &a, &b).unwrap()),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| vocab().plus(&a, &b).unwrap()),
                inner.clone().prop_map(|a| vocab().kplus(&a).unwrap()),
                (inner.clone(), inner.clone(), inner).prop_map(|(m, x, y)| {
                    let k = Continuation::tabulate(&FiniteType::bool(), |b| if b == &Value::Bool(true) { x.clone() } else { y.clone() });
                    vocab().bind(&m, k, &FiniteType::bool()).unwrap()
                }),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn guided_membership_agrees_with_enumeration(t in arb_term(), u in arb_term(), powerset in any::<bool>()) {
            let m = OutcomeModel::fresh();
            let mine = collect(&t, &m, 2, powerset).unwrap();
            let other = collect(&u, &m, 2, powerset).unwrap();
            let probe: Vec<Behavior> = mine.iter().chain(other.iter()).cloned().collect();
            let verdicts = Membership::check(&t, &m, 2, powerset, &probe).unwrap();
            for (b, ok) in probe.iter().zip(verdicts) {
                prop_assert_eq!(ok, mine.contains(b), "behavior {}", b);
            }
        }
    }
}
