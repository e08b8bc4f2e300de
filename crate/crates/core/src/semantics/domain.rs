//! Reader and update domains, built as fold algebras.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{FoldError, SemError};
use crate::fold::{AlgCase, Algebra, Folded};
use crate::func::FnRef;
use crate::term::{Node, NodeKind, Term};
use crate::value::Value;

/// Variable (or key) bindings read by effect calls.
pub type Env = BTreeMap<String, Value>;

/// A computation reading an environment.
pub type ReaderVal = Arc<dyn Fn(&Env) -> Result<Value, SemError> + Send + Sync>;

/// Runs an algebra over a term.
pub fn interpret<D: Clone>(t: &Term, alg: &Algebra<D>) -> Result<D, FoldError> {
    alg.fold(t)
}

fn env_key(v: &Value) -> String {
    match v {
        Value::Sym(s) => s.clone(),
        other => other.to_string(),
    }
}

fn lookup(env: &Env, args: &[Value]) -> Result<Value, SemError> {
    let key = args.first().map(env_key).unwrap_or_default();
    env.get(&key).cloned().ok_or(SemError::UnboundVar(key))
}

fn call(f: &FnRef, args: &[Value]) -> Result<Value, SemError> {
    f.apply(args).ok_or_else(|| SemError::UndefinedFunction {
        name: f.name().to_string(),
        args: args.to_vec(),
    })
}

fn pick<D: Clone>(branches: &BTreeMap<Value, D>, x: &Value) -> Result<D, SemError> {
    branches.get(x).cloned().ok_or_else(|| SemError::OutsideCarrier {
        value: x.clone(),
        ty: "continuation domain".into(),
    })
}

fn shape_error(kind: NodeKind) -> FoldError {
    FoldError::Domain(format!("unexpected children for {kind}"))
}

/// The reader algebra: every call of `effect` reads the environment at its
/// first argument. Covers pure, fmap, liftA2, selectBy, bind and effect.
pub fn reader(effect: &str) -> Algebra<ReaderVal> {
    let effect = effect.to_string();
    Algebra::new()
        .with_case(NodeKind::Pure, |t, _| {
            let Node::Pure(v) = t.node() else { unreachable!() };
            let v = v.clone();
            Ok(Arc::new(move |_: &Env| Ok(v.clone())) as ReaderVal)
        })
        .with_case(NodeKind::Effect(effect.clone()), move |t, _| {
            let Node::Effect { sig, args, .. } = t.node() else { unreachable!() };
            if sig.name() != effect {
                return Err(FoldError::Domain(format!("no reader for effect {}", sig.name())));
            }
            let args = args.clone();
            Ok(Arc::new(move |env: &Env| lookup(env, &args)) as ReaderVal)
        })
        .with_case(NodeKind::FMap, |t, f| {
            let (Node::FMap { g, .. }, Folded::One(a)) = (t.node(), f) else {
                return Err(shape_error(NodeKind::FMap));
            };
            let g = g.clone();
            Ok(Arc::new(move |env: &Env| call(&g, &[a(env)?])) as ReaderVal)
        })
        .with_case(NodeKind::LiftA2, |t, f| {
            let (Node::LiftA2 { f: h, .. }, Folded::Two(a, b)) = (t.node(), f) else {
                return Err(shape_error(NodeKind::LiftA2));
            };
            let h = h.clone();
            Ok(Arc::new(move |env: &Env| call(&h, &[a(env)?, b(env)?])) as ReaderVal)
        })
        .with_case(NodeKind::SelectBy, |t, f| {
            let (Node::SelectBy { f: h, .. }, Folded::Two(a, b)) = (t.node(), f) else {
                return Err(shape_error(NodeKind::SelectBy));
            };
            let h = h.clone();
            Ok(Arc::new(move |env: &Env| match call(&h, &[a(env)?])? {
                Value::Right(r) => Ok(*r),
                Value::Left(m) => {
                    let y = b(env)?;
                    m.call(&y).cloned().ok_or_else(|| SemError::UndefinedFunction {
                        name: m.to_string(),
                        args: vec![y],
                    })
                }
                other => Err(SemError::OutsideCarrier {
                    value: other,
                    ty: h.codomain().name().to_string(),
                }),
            }) as ReaderVal)
        })
        .with_case(NodeKind::Bind, |_, f| {
            let Folded::Bind(m, branches) = f else {
                return Err(shape_error(NodeKind::Bind));
            };
            Ok(Arc::new(move |env: &Env| {
                let x = m(env)?;
                pick(&branches, &x)?(env)
            }) as ReaderVal)
        })
}

/// A result with its cost: batched rounds and individual requests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cost {
    pub value: Value,
    pub rounds: u64,
    pub requests: u64,
}

/// A computation reading an environment and accumulating cost.
pub type UpdateVal = Arc<dyn Fn(&Env) -> Result<Cost, SemError> + Send + Sync>;

/// Per-kind cases of the update (cost) domain. Assemble an analyzer by
/// inserting the cases it needs into an [`Algebra`].
pub mod update {
    use super::*;

    fn free(value: Value) -> Cost {
        Cost {
            value,
            rounds: 0,
            requests: 0,
        }
    }

    pub fn pure() -> AlgCase<UpdateVal> {
        Arc::new(|t, _| {
            let Node::Pure(v) = t.node() else { unreachable!() };
            let v = v.clone();
            Ok(Arc::new(move |_: &Env| Ok(free(v.clone()))) as UpdateVal)
        })
    }

    pub fn fmap() -> AlgCase<UpdateVal> {
        Arc::new(|t, f| {
            let (Node::FMap { g, .. }, Folded::One(a)) = (t.node(), f) else {
                return Err(shape_error(NodeKind::FMap));
            };
            let g = g.clone();
            Ok(Arc::new(move |env: &Env| {
                let c = a(env)?;
                Ok(Cost {
                    value: call(&g, &[c.value])?,
                    ..c
                })
            }) as UpdateVal)
        })
    }

    fn lift(parallel: bool) -> AlgCase<UpdateVal> {
        Arc::new(move |t, f| {
            let (Node::LiftA2 { f: h, .. }, Folded::Two(a, b)) = (t.node(), f) else {
                return Err(shape_error(NodeKind::LiftA2));
            };
            let h = h.clone();
            Ok(Arc::new(move |env: &Env| {
                let (x, y) = (a(env)?, b(env)?);
                Ok(Cost {
                    value: call(&h, &[x.value, y.value])?,
                    rounds: if parallel {
                        x.rounds.max(y.rounds)
                    } else {
                        x.rounds + y.rounds
                    },
                    requests: x.requests + y.requests,
                })
            }) as UpdateVal)
        })
    }

    /// Independent operands are batched: rounds combine by `max`.
    pub fn lift_a2() -> AlgCase<UpdateVal> {
        lift(true)
    }

    /// No batching: rounds add up.
    pub fn lift_a2_sequential() -> AlgCase<UpdateVal> {
        lift(false)
    }

    pub fn bind() -> AlgCase<UpdateVal> {
        Arc::new(|_, f| {
            let Folded::Bind(m, branches) = f else {
                return Err(shape_error(NodeKind::Bind));
            };
            Ok(Arc::new(move |env: &Env| {
                let c = m(env)?;
                let k = pick(&branches, &c.value)?(env)?;
                Ok(Cost {
                    value: k.value,
                    rounds: c.rounds + k.rounds,
                    requests: c.requests + k.requests,
                })
            }) as UpdateVal)
        })
    }

    /// Each call of `effect` fetches the key in its first argument, costing
    /// one round and one request.
    pub fn get(effect: &str) -> AlgCase<UpdateVal> {
        let effect = effect.to_string();
        Arc::new(move |t, _| {
            let Node::Effect { sig, args, .. } = t.node() else { unreachable!() };
            if sig.name() != effect {
                return Err(FoldError::Domain(format!("no cost model for effect {}", sig.name())));
            }
            let args = args.clone();
            Ok(Arc::new(move |env: &Env| {
                Ok(Cost {
                    value: lookup(env, &args)?,
                    rounds: 1,
                    requests: 1,
                })
            }) as UpdateVal)
        })
    }
    /// Each call of `effect` yields `value` at a fixed cost of `rounds`
    /// rounds (and as many requests).
    pub fn constant(effect: &str, value: Value, rounds: u64) -> AlgCase<UpdateVal> {
        let effect = effect.to_string();
        Arc::new(move |t, _| {
            let Node::Effect { sig, .. } = t.node() else { unreachable!() };
            if sig.name() != effect {
                return Err(FoldError::Domain(format!("no cost model for effect {}", sig.name())));
            }
            let value = value.clone();
            Ok(Arc::new(move |_: &Env| {
                Ok(Cost {
                    value: value.clone(),
                    rounds,
                    requests: rounds,
                })
            }) as UpdateVal)
        })
    }
}
