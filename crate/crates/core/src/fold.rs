//! Generic bottom-up folds over terms with per-kind algebra cases.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::FoldError;
use crate::term::{Continuation, Node, NodeKind, Term};
use crate::value::Value;

/// Folded children handed to an algebra case.
pub enum Folded<D> {
    /// `Pure` and effect calls.
    Leaf,
    /// `FMap` and `KPlus`.
    One(D),
    /// `LiftA2`, `SelectBy` and `Plus`, in source order.
    Two(D, D),
    /// `Bind`: the scrutinee and one folded branch per carrier value.
    Bind(D, BTreeMap<Value, D>),
}

/// One case of an algebra. It receives the node itself (for its payload:
/// functions, values, effect arguments) and the folded children.
pub type AlgCase<D> = Arc<dyn Fn(&Term, Folded<D>) -> Result<D, FoldError> + Send + Sync>;

/// A dispatch table from node kinds to algebra cases.
pub struct Algebra<D> {
    cases: BTreeMap<NodeKind, AlgCase<D>>,
}

impl<D> Clone for Algebra<D> {
    fn clone(&self) -> Self {
        Algebra {
            cases: self.cases.clone(),
        }
    }
}

impl<D> Default for Algebra<D> {
    fn default() -> Self {
        Algebra {
            cases: BTreeMap::new(),
        }
    }
}

impl<D: Clone> Algebra<D> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_case(
        mut self,
        kind: NodeKind,
        case: impl Fn(&Term, Folded<D>) -> Result<D, FoldError> + Send + Sync + 'static,
    ) -> Self {
        self.cases.insert(kind, Arc::new(case));
        self
    }

    pub fn insert(&mut self, kind: NodeKind, case: AlgCase<D>) -> Option<AlgCase<D>> {
        self.cases.insert(kind, case)
    }

    pub fn case(&self, kind: &NodeKind) -> Option<&AlgCase<D>> {
        self.cases.get(kind)
    }

    pub fn kinds(&self) -> impl Iterator<Item = &NodeKind> {
        self.cases.keys()
    }

    /// Joins two algebras. Cases of `self` win on overlap.
    pub fn merge(&self, other: &Algebra<D>) -> Algebra<D> {
        let mut cases = other.cases.clone();
        for (k, c) in &self.cases {
            cases.insert(k.clone(), c.clone());
        }
        Algebra { cases }
    }

    /// Folds `t`. Shared subterms are folded once.
    pub fn fold(&self, t: &Term) -> Result<D, FoldError> {
        let mut memo = HashMap::new();
        self.fold_memo(t, &mut memo)
    }

    fn fold_memo(&self, t: &Term, memo: &mut HashMap<usize, D>) -> Result<D, FoldError> {
        if let Some(d) = memo.get(&t.addr()) {
            return Ok(d.clone());
        }
        let kind = t.kind();
        let case = self
            .cases
            .get(&kind)
            .ok_or_else(|| FoldError::MissingAlgebraCase(kind.clone()))?
            .clone();
        let folded = match t.node() {
            Node::Pure(_) | Node::Effect { .. } => Folded::Leaf,
            Node::FMap { arg, .. } => Folded::One(self.fold_memo(arg, memo)?),
            Node::KPlus(a) => Folded::One(self.fold_memo(a, memo)?),
            Node::LiftA2 { left, right, .. } => {
                Folded::Two(self.fold_memo(left, memo)?, self.fold_memo(right, memo)?)
            }
            Node::SelectBy {
                scrutinee, handler, ..
            } => Folded::Two(self.fold_memo(scrutinee, memo)?, self.fold_memo(handler, memo)?),
            Node::Plus(a, b) => Folded::Two(self.fold_memo(a, memo)?, self.fold_memo(b, memo)?),
            Node::Bind { m, k } => {
                let dm = self.fold_memo(m, memo)?;
                let table = match k {
                    Continuation::Table(table) => table,
                    Continuation::Opaque { name, .. } => {
                        return Err(FoldError::OpaqueContinuation(name.clone()))
                    }
                };
                let mut branches = BTreeMap::new();
                for (v, next) in table.iter() {
                    branches.insert(v.clone(), self.fold_memo(next, memo)?);
                }
                Folded::Bind(dm, branches)
            }
        };
        let d = case(t, folded)?;
        memo.insert(t.addr(), d.clone());
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::stdlib::andb;
    use crate::term::{EffectOp, EffectSig, Vocabulary};
    use crate::value::FiniteType;

    fn counting() -> Algebra<u64> {
        let sum = |_: &Term, f: Folded<u64>| -> Result<u64, FoldError> {
            Ok(1 + match f {
                Folded::Leaf => 0,
                Folded::One(a) => a,
                Folded::Two(a, b) => a + b,
                Folded::Bind(m, ks) => m + ks.values().sum::<u64>(),
            })
        };
        let mut alg = Algebra::new();
        for k in [NodeKind::Pure, NodeKind::FMap, NodeKind::LiftA2, NodeKind::Bind] {
            alg = alg.with_case(k, sum);
        }
        alg.with_case(NodeKind::Effect("DataEff".into()), sum)
    }

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
        Vocabulary::of(&[NodeKind::Pure, NodeKind::LiftA2, NodeKind::Plus, NodeKind::Bind])
            .with_effect(sig)
            .unwrap()
    }

    #[test]
    fn counts_nodes() {
        let v = vocab();
        let t = v.pure(&FiniteType::bool(), Value::Bool(true)).unwrap();
        assert_eq!(counting().fold(&t), Ok(1));
        let x = v.effect("DataEff", "GetData", vec![Value::sym("x")]).unwrap();
        let conj = v.lift_a2(&andb(), &x, &t).unwrap();
        assert_eq!(counting().fold(&conj), Ok(3));
        let b = v.seq(&x, &conj).unwrap();
        // m, then one branch per boolean
        assert_eq!(counting().fold(&b), Ok(1 + 1 + 3 + 3));
    }

    #[test]
    fn missing_case_is_reported() {
        let v = vocab();
        let t = v.pure(&FiniteType::bool(), Value::Bool(true)).unwrap();
        let p = v.plus(&t, &t).unwrap();
        assert_eq!(
            counting().fold(&p),
            Err(FoldError::MissingAlgebraCase(NodeKind::Plus))
        );
    }

    #[test]
    fn merge_prefers_left() {
        let a: Algebra<u64> = Algebra::new().with_case(NodeKind::Pure, |_, _| Ok(1));
        let b: Algebra<u64> = Algebra::new()
            .with_case(NodeKind::Pure, |_, _| Ok(2))
            .with_case(NodeKind::Plus, |_, _| Ok(3));
        let m = a.merge(&b);
        assert!(Arc::ptr_eq(m.case(&NodeKind::Pure).unwrap(), a.case(&NodeKind::Pure).unwrap()));
        assert!(Arc::ptr_eq(m.case(&NodeKind::Plus).unwrap(), b.case(&NodeKind::Plus).unwrap()));
    }
}
