//! Canonical s-expression form of derivations:
//! `(derive (equiv L R) Rule ((n 3)) (child ...))`.

use crate::error::ParseError;
use crate::sexpr::{parse_one, term_to_sexpr, Registry, SExpr};

use super::{DerivRef, Derivation, Relation, Rule};

pub fn derivation_to_sexpr(d: &Derivation) -> SExpr {
    let j = &d.judgment;
    let bindings = match d.n {
        Some(n) => vec![SExpr::List(vec![SExpr::atom("n"), SExpr::atom(n.to_string())])],
        None => vec![],
    };
    SExpr::List(vec![
        SExpr::atom("derive"),
        SExpr::List(vec![
            SExpr::atom(j.rel.name()),
            term_to_sexpr(&j.lhs),
            term_to_sexpr(&j.rhs),
        ]),
        SExpr::atom(d.rule.name()),
        SExpr::List(bindings),
        SExpr::List(d.children.iter().map(|c| derivation_to_sexpr(c)).collect()),
    ])
}

pub fn derivation_from_sexpr(reg: &Registry, e: &SExpr) -> Result<DerivRef, ParseError> {
    let bad = || ParseError::Malformed {
        what: "derivation",
        text: e.to_string(),
    };
    let [judgment, rule, bindings, children] = e.headed("derive").ok_or_else(bad)? else {
        return Err(bad());
    };
    let (rel, lhs, rhs) = match judgment.as_list() {
        Some([SExpr::Atom(rel), l, r]) => {
            let rel = match rel.as_str() {
                "equiv" => Relation::Equiv,
                "refine" => Relation::Refine,
                _ => return Err(bad()),
            };
            (rel, reg.term_from_sexpr(l)?, reg.term_from_sexpr(r)?)
        }
        _ => return Err(bad()),
    };
    let rule_name = rule.as_atom().ok_or_else(bad)?;
    let rule = Rule::from_name(rule_name).ok_or_else(|| ParseError::Unknown {
        what: "rule",
        name: rule_name.into(),
    })?;
    let mut n = None;
    for b in bindings.as_list().ok_or_else(bad)? {
        match b.as_list() {
            Some([SExpr::Atom(k), SExpr::Atom(v)]) if k == "n" => {
                n = Some(v.parse().map_err(|_| bad())?);
            }
            _ => return Err(bad()),
        }
    }
    let children = children
        .as_list()
        .ok_or_else(bad)?
        .iter()
        .map(|c| derivation_from_sexpr(reg, c))
        .collect::<Result<Vec<_>, _>>()?;
    let mut d = Derivation::new(rel, &lhs, &rhs, rule, children);
    std::sync::Arc::get_mut(&mut d).expect("fresh").n = n;
    Ok(d)
}

pub fn parse_derivation(reg: &Registry, text: &str) -> Result<DerivRef, ParseError> {
    derivation_from_sexpr(reg, &parse_one(text)?)
}
