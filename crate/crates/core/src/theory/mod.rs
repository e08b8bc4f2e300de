//! Adverb theories as rule schemas, derivations, a checker, and a bounded
//! prover.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::term::Term;

mod check;
pub mod gen;
mod prove;
mod serial;

pub use check::{check_derivation, Rejection, Verdict};
pub use prove::prove_bounded;
pub use serial::{derivation_from_sexpr, derivation_to_sexpr, parse_derivation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TheoryId {
    Streamingly,
    Statically,
    StaticallyInParallel,
    Conditionally,
    Dynamically,
    Repeatedly,
    Nondeterministically,
}

impl TheoryId {
    pub const ALL: [TheoryId; 7] = [
        TheoryId::Streamingly,
        TheoryId::Statically,
        TheoryId::StaticallyInParallel,
        TheoryId::Conditionally,
        TheoryId::Dynamically,
        TheoryId::Repeatedly,
        TheoryId::Nondeterministically,
    ];

    /// Kebab-case name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            TheoryId::Streamingly => "streamingly",
            TheoryId::Statically => "statically",
            TheoryId::StaticallyInParallel => "statically-in-parallel",
            TheoryId::Conditionally => "conditionally",
            TheoryId::Dynamically => "dynamically",
            TheoryId::Repeatedly => "repeatedly",
            TheoryId::Nondeterministically => "nondeterministically",
        }
    }

    pub fn from_name(s: &str) -> Option<TheoryId> {
        TheoryId::ALL.into_iter().find(|t| t.name() == s)
    }

    fn is_addon(self) -> bool {
        matches!(self, TheoryId::Repeatedly | TheoryId::Nondeterministically)
    }

    pub fn rules(self) -> &'static [Rule] {
        use Rule::*;
        match self {
            TheoryId::Statically => &[
                CongLiftA2,
                LeftIdentity,
                RightIdentity,
                Associativity,
                Naturality,
                Refl,
                Sym,
                Trans,
            ],
            TheoryId::StaticallyInParallel => &[
                CongLiftA2,
                LeftIdentity,
                RightIdentity,
                Commutativity,
                Refl,
                Sym,
                Trans,
            ],
            TheoryId::Dynamically => &[
                MonadLeftIdentity,
                MonadRightIdentity,
                MonadAssociativity,
                CongBind,
                Refl,
                Sym,
                Trans,
            ],
            TheoryId::Conditionally => &[CongSelectBy, SelectInr, Refl, Sym, Trans],
            TheoryId::Streamingly => &[
                CongFMap,
                FunctorIdentity,
                FunctorComposition,
                Refl,
                Sym,
                Trans,
            ],
            TheoryId::Repeatedly => &[Repeat, Kplus, CongKPlus, Refl, Sym, Trans, Promote],
            TheoryId::Nondeterministically => &[
                PlusCommutativity,
                PlusAssociativity,
                PlusLub,
                LeftPlus,
                RightPlus,
                CongPlus,
                Refl,
                Sym,
                Trans,
                Promote,
            ],
        }
    }
}

impl fmt::Display for TheoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rule schemas. Congruence rules, `Refl` and `Trans` are
/// relation-polymorphic; the other rules fix their relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Refl,
    Sym,
    Trans,
    /// `a ≅ b` gives `a ⊑ b`.
    Promote,
    CongFMap,
    CongLiftA2,
    CongSelectBy,
    CongBind,
    CongKPlus,
    CongPlus,
    LeftIdentity,
    RightIdentity,
    Associativity,
    Naturality,
    Commutativity,
    MonadLeftIdentity,
    MonadRightIdentity,
    MonadAssociativity,
    SelectInr,
    FunctorIdentity,
    FunctorComposition,
    Repeat,
    Kplus,
    PlusCommutativity,
    PlusAssociativity,
    PlusLub,
    LeftPlus,
    RightPlus,
}

impl Rule {
    pub const ALL: [Rule; 28] = [
        Rule::Refl,
        Rule::Sym,
        Rule::Trans,
        Rule::Promote,
        Rule::CongFMap,
        Rule::CongLiftA2,
        Rule::CongSelectBy,
        Rule::CongBind,
        Rule::CongKPlus,
        Rule::CongPlus,
        Rule::LeftIdentity,
        Rule::RightIdentity,
        Rule::Associativity,
        Rule::Naturality,
        Rule::Commutativity,
        Rule::MonadLeftIdentity,
        Rule::MonadRightIdentity,
        Rule::MonadAssociativity,
        Rule::SelectInr,
        Rule::FunctorIdentity,
        Rule::FunctorComposition,
        Rule::Repeat,
        Rule::Kplus,
        Rule::PlusCommutativity,
        Rule::PlusAssociativity,
        Rule::PlusLub,
        Rule::LeftPlus,
        Rule::RightPlus,
    ];

    pub fn name(self) -> String {
        format!("{self:?}")
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    /// Equational axioms: no premises, conclusion is `≅`.
    pub fn is_equiv_axiom(self) -> bool {
        use Rule::*;
        matches!(
            self,
            LeftIdentity
                | RightIdentity
                | Associativity
                | Naturality
                | Commutativity
                | MonadLeftIdentity
                | MonadRightIdentity
                | MonadAssociativity
                | SelectInr
                | FunctorIdentity
                | FunctorComposition
                | PlusCommutativity
                | PlusAssociativity
        )
    }

    /// Refinement axioms: no premises, conclusion is `⊑`.
    pub fn is_refine_axiom(self) -> bool {
        matches!(self, Rule::Repeat | Rule::LeftPlus | Rule::RightPlus)
    }

    pub fn is_congruence(self) -> bool {
        use Rule::*;
        matches!(
            self,
            CongFMap | CongLiftA2 | CongSelectBy | CongBind | CongKPlus | CongPlus
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Equiv,
    Refine,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Equiv => "equiv",
            Relation::Refine => "refine",
        }
    }
}

/// A union of adverb theories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    ids: BTreeSet<TheoryId>,
    rules: BTreeSet<Rule>,
    relations: BTreeSet<Relation>,
}

impl Theory {
    pub fn of(ids: &[TheoryId]) -> Theory {
        assert!(!ids.is_empty(), "a theory needs at least one adverb");
        let ids: BTreeSet<_> = ids.iter().copied().collect();
        let rules = ids.iter().flat_map(|id| id.rules().iter().copied()).collect();
        let mut relations = BTreeSet::from([Relation::Equiv]);
        if ids.iter().any(|id| id.is_addon()) {
            relations.insert(Relation::Refine);
        }
        Theory {
            ids,
            rules,
            relations,
        }
    }

    pub fn union(&self, other: &Theory) -> Theory {
        let ids: Vec<_> = self.ids.union(&other.ids).copied().collect();
        Theory::of(&ids)
    }

    pub fn ids(&self) -> &BTreeSet<TheoryId> {
        &self.ids
    }

    pub fn rules(&self) -> &BTreeSet<Rule> {
        &self.rules
    }

    pub fn relations(&self) -> &BTreeSet<Relation> {
        &self.relations
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.rules.contains(&rule)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Judgment {
    pub rel: Relation,
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.rel {
            Relation::Equiv => "≅",
            Relation::Refine => "⊑",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

/// A proof tree. Checked by [`check_derivation`], never trusted.
#[derive(Debug)]
pub struct Derivation {
    pub judgment: Judgment,
    pub rule: Rule,
    /// Metavariable bindings; only `Repeat` uses one (`n`, the copy count).
    pub n: Option<usize>,
    pub children: Vec<DerivRef>,
}

pub type DerivRef = Arc<Derivation>;

impl Derivation {
    pub fn new(rel: Relation, lhs: &Term, rhs: &Term, rule: Rule, children: Vec<DerivRef>) -> DerivRef {
        Arc::new(Derivation {
            judgment: Judgment {
                rel,
                lhs: lhs.clone(),
                rhs: rhs.clone(),
            },
            rule,
            n: None,
            children,
        })
    }

    pub fn axiom(rel: Relation, rule: Rule, lhs: &Term, rhs: &Term) -> DerivRef {
        Self::new(rel, lhs, rhs, rule, vec![])
    }

    pub fn repeat(lhs: &Term, rhs: &Term, n: usize) -> DerivRef {
        Arc::new(Derivation {
            judgment: Judgment {
                rel: Relation::Refine,
                lhs: lhs.clone(),
                rhs: rhs.clone(),
            },
            rule: Rule::Repeat,
            n: Some(n),
            children: vec![],
        })
    }

    pub fn refl(rel: Relation, t: &Term) -> DerivRef {
        Self::new(rel, t, t, Rule::Refl, vec![])
    }

    pub fn sym(d: &DerivRef) -> DerivRef {
        Self::new(
            Relation::Equiv,
            &d.judgment.rhs,
            &d.judgment.lhs,
            Rule::Sym,
            vec![d.clone()],
        )
    }

    pub fn trans(d1: &DerivRef, d2: &DerivRef) -> DerivRef {
        Self::new(
            d1.judgment.rel,
            &d1.judgment.lhs,
            &d2.judgment.rhs,
            Rule::Trans,
            vec![d1.clone(), d2.clone()],
        )
    }

    /// Chains derivations left to right with `Trans`.
    pub fn chain(ds: &[DerivRef]) -> DerivRef {
        let mut iter = ds.iter();
        let first = iter.next().expect("empty chain").clone();
        iter.fold(first, |acc, d| Self::trans(&acc, d))
    }

    pub fn promote(d: &DerivRef) -> DerivRef {
        Self::new(
            Relation::Refine,
            &d.judgment.lhs,
            &d.judgment.rhs,
            Rule::Promote,
            vec![d.clone()],
        )
    }

    pub fn lhs(&self) -> &Term {
        &self.judgment.lhs
    }

    pub fn rhs(&self) -> &Term {
        &self.judgment.rhs
    }

    pub fn rel(&self) -> Relation {
        self.judgment.rel
    }

    /// Number of nodes, counting shared subderivations once per occurrence.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Rule names only, e.g. `Trans(Sym(RightIdentity), Refl)`.
    pub fn outline(&self) -> String {
        if self.children.is_empty() {
            return self.rule.name();
        }
        let inner: Vec<String> = self.children.iter().map(|c| c.outline()).collect();
        format!("{}({})", self.rule.name(), inner.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statically_has_eight_rules() {
        assert_eq!(Theory::of(&[TheoryId::Statically]).rules().len(), 8);
    }

    #[test]
    fn parallel_swaps_associativity_for_commutativity() {
        let th = Theory::of(&[TheoryId::StaticallyInParallel]);
        assert!(th.has(Rule::Commutativity));
        assert!(!th.has(Rule::Associativity));
        assert!(!th.has(Rule::Naturality));
    }

    #[test]
    fn union_is_idempotent_commutative_associative() {
        let r = Theory::of(&[TheoryId::Repeatedly]);
        assert_eq!(r.union(&r), r);
        let (a, b, c) = (
            Theory::of(&[TheoryId::Dynamically]),
            Theory::of(&[TheoryId::Nondeterministically]),
            Theory::of(&[TheoryId::Streamingly]),
        );
        assert_eq!(a.union(&b), b.union(&a));
        assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
        assert_eq!(
            a.union(&b).rules(),
            &a.rules().union(b.rules()).copied().collect()
        );
    }

    #[test]
    fn refinement_only_with_addons() {
        assert_eq!(Theory::of(&[TheoryId::Dynamically]).relations().len(), 1);
        assert!(Theory::of(&[TheoryId::Dynamically, TheoryId::Repeatedly])
            .relations()
            .contains(&Relation::Refine));
    }

    #[test]
    fn names_round_trip() {
        for id in TheoryId::ALL {
            assert_eq!(TheoryId::from_name(id.name()), Some(id));
        }
        for r in Rule::ALL {
            assert_eq!(Rule::from_name(&r.name()), Some(r));
        }
    }
}
