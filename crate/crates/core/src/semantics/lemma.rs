//! Associativity fails in the powerset domain: `liftA2` there permutes its
//! two operands as wholes, so regrouping three effects changes which orders
//! are reachable.

use super::{powerset_interpret, Behavior, OutcomeModel};
use crate::error::SemError;
use crate::func::stdlib::first;
use crate::term::{EffectOp, EffectSig, NodeKind, Term, Vocabulary};
use crate::value::FiniteType;

pub const TICK_EFF: &str = "Tick";

#[derive(Clone, Debug)]
pub struct Counterexample {
    /// `(a * b) * c`
    pub left_nested: Term,
    /// `a * (b * c)`
    pub right_nested: Term,
    /// A behavior of exactly one side.
    pub witness: Behavior,
    pub witness_in_left: bool,
}

/// Tries every assignment of three distinct effects to `a`, `b`, `c` and
/// returns the first grouping pair whose powerset interpretations differ.
pub fn associativity_counterexample() -> Result<Option<Counterexample>, SemError> {
    let unit = FiniteType::unit();
    let ops = ["x", "y", "z"];
    let sig = EffectSig::new(TICK_EFF, ops.iter().map(|op| EffectOp::fixed(op, vec![], unit.clone())).collect())?;
    let v = Vocabulary::of(&[NodeKind::Pure, NodeKind::LiftA2]).with_effect(sig)?;
    let f = first(&unit, &unit);
    let model = OutcomeModel::fresh();
    let effects: Vec<Term> = ops
        .iter()
        .map(|op| v.effect(TICK_EFF, op, vec![]))
        .collect::<Result<_, _>>()?;
    for [i, j, k] in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let (a, b, c) = (&effects[i], &effects[j], &effects[k]);
        let left_nested = v.lift_a2(&f, &v.lift_a2(&f, a, b)?, c)?;
        let right_nested = v.lift_a2(&f, a, &v.lift_a2(&f, b, c)?)?;
        let l = powerset_interpret(&left_nested, &model, 1)?;
        let r = powerset_interpret(&right_nested, &model, 1)?;
        let only_l = l.iter().find(|x| !r.contains(x));
        let only_r = r.iter().find(|x| !l.contains(x));
        if let Some(w) = only_l.or(only_r) {
            return Ok(Some(Counterexample {
                witness: w.clone(),
                witness_in_left: only_l.is_some(),
                left_nested,
                right_nested,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regrouping_changes_reachable_orders() {
        let cx = associativity_counterexample().unwrap().expect("a counterexample exists");
        assert!(cx.witness_in_left);
        // (x * y) * z can run y, x, z; x * (y * z) always starts or ends with x
        assert_eq!(cx.witness.to_string(), "[Tick.y()=tt; Tick.x()=tt; Tick.z()=tt] => tt");
    }
}
