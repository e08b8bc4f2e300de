//! The refinement chain `Impl ⊑ L1 ⊑ L2 ⊑ L3 ⊑ Spec`, checked both by
//! explicit derivations and by the bounded trace oracle.

use std::collections::{BTreeMap, HashMap};

use super::embed::{ServerLang, MEMORY_EFF, NETWORK_EFF, FAIL_EFF};
use super::{parse_program, Program, Stmt};
use crate::error::{EmbedError, SemError};
use crate::report::Status;
use crate::semantics::{refinement_witness, OutcomeModel};
use crate::term::{Node, Term};
use crate::theory::{check_derivation, DerivRef, Derivation, Relation, Rule, Theory, TheoryId};
use crate::value::Value;

/// The implementation listing.
pub const IMPL_LISTING: &str = "\
newconn ::<- accept ;;
IF (not (*newconn == 0)) THEN
  newconn_rec ::=
    connection *newconn READING ;;
  conns ::++ newconn_rec
END ;;
FOR y IN conns DO
  IF (y->state == WRITING) THEN
    r ::<- write y->id *s ;;
    y->state ::= CLOSED
  END ;;
  IF (y->state == READING) THEN
    r ::<- read y->id ;;
    IF (*r == 0) THEN
      y->state ::= CLOSED
    ELSE
      s ::= *r ;;
      y->state ::= WRITING
    END
  END
END.
";

/// The specification listing.
pub const SPEC_LISTING: &str = "\
Some
  (Or (newconn ::<- accept ;;
       IF (not (*newconn == 0)) THEN
         newconn_rec ::=
           connection *newconn READING ;;
         conns ::++ newconn_rec
       END)
       (OneOf (conns) y
         (Or (IF (y->state == WRITING) THEN
                r ::<- write y->id *s ;;
                y->state ::= CLOSED
              END)
             (IF (y->state == READING) THEN
                r ::<- read y->id ;;
                IF (*r == 0) THEN
                  y->state ::= CLOSED
                ELSE
                  s ::= *r ;;
                  y->state ::= WRITING
                END
              END))))
";

/// The five programs of the chain, as syntax and as terms.
pub struct Fixtures {
    pub impl_program: Program,
    pub spec_program: Program,
    pub l1: Stmt,
    pub l2: Stmt,
    pub l3: Stmt,
    pub terms: [Term; 5],
}

impl Fixtures {
    pub fn names() -> [&'static str; 5] {
        ["Impl", "L1", "L2", "L3", "Spec"]
    }
}

/// Parses the listings, cuts `Impl` into its fragments `A` (accept), `B`
/// (write step) and `C` (read step), and builds the intermediate layers.
pub fn fixtures(lang: &ServerLang) -> Result<Fixtures, EmbedError> {
    let impl_program = parse_program(IMPL_LISTING).expect("listing parses");
    let spec_program = parse_program(SPEC_LISTING).expect("listing parses");
    let Stmt::Seq(s1, rest) = &impl_program.body else {
        unreachable!("listing shape")
    };
    let Stmt::Seq(guard, for_loop) = &**rest else {
        unreachable!("listing shape")
    };
    let Stmt::For(y, xs, body) = &**for_loop else {
        unreachable!("listing shape")
    };
    let Stmt::Seq(b, c) = &**body else {
        unreachable!("listing shape")
    };
    let a = Stmt::seq((**s1).clone(), (**guard).clone());
    let bc = Stmt::seq((**b).clone(), (**c).clone());
    let or_bc = Stmt::Or(b.clone(), c.clone());
    let l1 = Stmt::seq(a.clone(), Stmt::For(y.clone(), xs.clone(), Box::new(bc.clone())));
    let l2 = Stmt::seq(a.clone(), Stmt::OneOf(xs.clone(), y.clone(), Box::new(bc)));
    let l3 = Stmt::seq(a, Stmt::OneOf(xs.clone(), y.clone(), Box::new(or_bc)));
    let terms = [
        lang.embed(&impl_program.body)?,
        lang.embed(&l1)?,
        lang.embed(&l2)?,
        lang.embed(&l3)?,
        lang.embed(&spec_program.body)?,
    ];
    Ok(Fixtures {
        impl_program,
        spec_program,
        l1,
        l2,
        l3,
        terms,
    })
}

/// Network outcomes: `accept` and `read` in {0,1,2}, `write` in {0,1};
/// `fail` has none. Memory is interpreted and unobserved.
pub fn network_model() -> OutcomeModel {
    let n = |xs: &[u32]| xs.iter().map(|&x| Value::Nat(x)).collect();
    OutcomeModel::fresh()
        .with_memory(MEMORY_EFF)
        .with_outcomes(NETWORK_EFF, "accept", n(&[0, 1, 2]))
        .with_outcomes(NETWORK_EFF, "read", n(&[0, 1, 2]))
        .with_outcomes(NETWORK_EFF, "write", n(&[0, 1]))
        .with_outcomes(FAIL_EFF, "fail", vec![])
}

/// Every store with `conns` holding connections `1..=n` in all state
/// combinations; other variables start at zero.
pub fn initial_stores(lang: &ServerLang, n: u32) -> Vec<BTreeMap<String, Value>> {
    let states = ["READING", "WRITING", "CLOSED"];
    let mut out = Vec::new();
    let combos = 3usize.pow(n);
    for mut code in 0..combos {
        let mut conns = Vec::new();
        for id in 1..=n {
            conns.push(lang.connection(id, states[code % 3]));
            code /= 3;
        }
        let store: BTreeMap<String, Value> = [
            ("newconn", Value::Nat(0)),
            ("r", Value::Nat(0)),
            ("s", Value::Nat(0)),
            ("newconn_rec", lang.connection(0, "CLOSED")),
            ("conns", Value::List(conns)),
            ("y", lang.pointer(0)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        out.push(store);
    }
    out
}

fn refine_theory() -> Theory {
    Theory::of(&[TheoryId::Dynamically, TheoryId::Repeatedly, TheoryId::Nondeterministically])
}

/// Relates `l` and `r` by congruence wherever they share a head, using
/// `leaf` where they differ. Shared subterms are related once.
struct Congruence<'a> {
    leaf: &'a dyn Fn(&Term, &Term) -> Option<DerivRef>,
    memo: HashMap<(usize, usize), Option<DerivRef>>,
}

impl Congruence<'_> {
    fn relate(&mut self, l: &Term, r: &Term) -> Option<DerivRef> {
        let key = (l.addr(), r.addr());
        if let Some(d) = self.memo.get(&key) {
            return d.clone();
        }
        let d = self.relate_uncached(l, r);
        self.memo.insert(key, d.clone());
        d
    }

    fn relate_uncached(&mut self, l: &Term, r: &Term) -> Option<DerivRef> {
        if l == r {
            return Some(Derivation::refl(Relation::Refine, l));
        }
        if let Some(d) = (self.leaf)(l, r) {
            return Some(d);
        }
        let (rule, children) = match (l.node(), r.node()) {
            (Node::Bind { m: m1, k: k1 }, Node::Bind { m: m2, k: k2 }) => {
                let mut children = vec![self.relate(m1, m2)?];
                for x in m1.ty().carrier() {
                    children.push(self.relate(&k1.apply(x)?, &k2.apply(x)?)?);
                }
                (Rule::CongBind, children)
            }
            (Node::Plus(a1, b1), Node::Plus(a2, b2)) => (Rule::CongPlus, vec![self.relate(a1, a2)?, self.relate(b1, b2)?]),
            (Node::KPlus(a1), Node::KPlus(a2)) => (Rule::CongKPlus, vec![self.relate(a1, a2)?]),
            _ => return None,
        };
        Some(Derivation::new(Relation::Refine, l, r, rule, children))
    }
}

/// `x ⊑ p` where `x` is one of the alternatives of the right-nested
/// choice `p`, by `LeftPlus` and a chain of `RightPlus`.
fn member(x: &Term, p: &Term) -> Option<DerivRef> {
    let mut suffixes = vec![p.clone()];
    while let Node::Plus(_, rest) = suffixes.last().expect("non-empty").node() {
        let rest = rest.clone();
        suffixes.push(rest);
    }
    let (start, mut d) = suffixes.iter().enumerate().find_map(|(i, q)| match q.node() {
        Node::Plus(a, _) if a == x => Some((i, Some(Derivation::axiom(Relation::Refine, Rule::LeftPlus, x, q)))),
        _ if q == x => Some((i, None)),
        _ => None,
    })?;
    for i in (0..start).rev() {
        let step = Derivation::axiom(Relation::Refine, Rule::RightPlus, &suffixes[i + 1], &suffixes[i]);
        d = Some(match d {
            Some(d) => Derivation::trans(&d, &step),
            None => step,
        });
    }
    Some(d.unwrap_or_else(|| Derivation::refl(Relation::Refine, x)))
}

/// `seq(x_0, … seq(x_{n-1}, x_n)) ⊑ repeat(p, n+1)` given each `x_i ⊑ p`.
fn seq_into_repeat(lang: &ServerLang, f: &Term, p: &Term) -> Option<DerivRef> {
    match f.node() {
        Node::Bind { m, k } if m.ty().len() == 1 => {
            let rest = k.apply(&m.ty().carrier()[0])?;
            let d_head = member(m, p)?;
            let d_rest = seq_into_repeat(lang, &rest, p)?;
            let rhs = lang.vocab().seq(p, d_rest.rhs()).ok()?;
            Some(Derivation::new(Relation::Refine, f, &rhs, Rule::CongBind, vec![d_head, d_rest]))
        }
        _ => member(f, p),
    }
}

/// Copies of `p` in `seq(p, … seq(p, p))`.
fn repeat_len(t: &Term, p: &Term) -> usize {
    match t.node() {
        _ if t == p => 1,
        Node::Bind { k, .. } => 1 + repeat_len(&k.apply(&Value::Unit).expect("constant continuation"), p),
        _ => unreachable!("built by seq_into_repeat"),
    }
}

/// `seq(…) ⊑ kplus p` through `repeat(p, n)`.
fn seq_into_kplus(lang: &ServerLang, f: &Term, kp: &Term) -> Option<DerivRef> {
    let Node::KPlus(p) = kp.node() else { return None };
    let d = seq_into_repeat(lang, f, p)?;
    let n = repeat_len(d.rhs(), p);
    Some(Derivation::trans(&d, &Derivation::repeat(d.rhs(), kp, n)))
}

/// Derivations for the four links, in chain order.
pub fn derivations(lang: &ServerLang, fx: &Fixtures) -> [Option<DerivRef>; 4] {
    let [imp, l1, l2, l3, spec] = &fx.terms;

    // Impl ⊑ L1: reassociate the first two statements
    let d1 = Some(Derivation::promote(&Derivation::sym(&Derivation::axiom(
        Relation::Equiv,
        Rule::MonadAssociativity,
        l1,
        imp,
    ))));

    // L1 ⊑ L2: per list length, the unrolled loop is one choice per round
    let d2 = Congruence {
        leaf: &|l, r| match (l.node(), r.node()) {
            (Node::KPlus(_), _) => None,
            (_, Node::KPlus(_)) => seq_into_kplus(lang, l, r),
            _ => None,
        },
        memo: HashMap::new(),
    }
    .relate(l1, l2);

    // L2 ⊑ L3: `B ;; C` is two rounds of `Or B C`
    let d3 = Congruence {
        leaf: &|l, r| match (l.node(), r.node()) {
            (Node::Bind { .. }, Node::KPlus(p)) if matches!(p.node(), Node::Plus(..)) => seq_into_kplus(lang, l, r),
            _ => None,
        },
        memo: HashMap::new(),
    }
    .relate(l2, l3);

    // L3 ⊑ Spec: `A ;; OneOf` is two rounds of the inner choice, then one
    // round of the outer repetition
    let d4 = (|| {
        let Node::KPlus(inner) = spec.node() else { return None };
        let d = seq_into_kplus(lang, l3, inner)?;
        Some(Derivation::trans(&d, &Derivation::repeat(inner, spec, 1)))
    })();
    [d1, d2, d3, d4]
}

/// One link of the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainLink {
    pub lhs: &'static str,
    pub rhs: &'static str,
}

impl ChainLink {
    pub fn name(&self) -> String {
        format!("{} ⊑ {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug)]
pub struct LinkReport {
    pub link: ChainLink,
    /// Proved by a checked derivation, or unknown.
    pub derivation: Status,
    /// Proved or refuted by bounded trace inclusion.
    pub oracle: Status,
    pub witness: Option<String>,
    pub bounds: (usize, usize),
}

impl LinkReport {
    /// PROVED only when both routes agree.
    pub fn verdict(&self) -> Status {
        match (self.derivation, self.oracle) {
            (_, Status::Refuted) => Status::Refuted,
            (Status::Proved, Status::Proved) => Status::Proved,
            _ => Status::Unknown,
        }
    }
}

fn oracle(
    lhs: &Term,
    rhs: &Term,
    stores: &[BTreeMap<String, Value>],
    bounds: (usize, usize),
) -> Result<(Status, Option<String>), SemError> {
    for store in stores {
        let model = network_model().with_store(store.clone());
        if let Some(w) = refinement_witness(lhs, rhs, &model, bounds.0, bounds.1)? {
            return Ok((Status::Refuted, Some(format!("{w} from conns = {}", store["conns"]))));
        }
    }
    Ok((Status::Proved, None))
}

/// Checks the four links and the reverse link `Spec ⊑ Impl` with `n`
/// initial connections.
pub fn verify_chain(n: u32, bound_l: usize, bound_r: usize) -> Result<Vec<LinkReport>, VerifyError> {
    assert!(bound_r >= bound_l && bound_l >= 1, "bounds must satisfy 1 <= left <= right");
    let lang = ServerLang::new(n, n as usize + 2);
    let fx = fixtures(&lang)?;
    let stores = initial_stores(&lang, n);
    let th = refine_theory();
    let names = Fixtures::names();
    let mut out = Vec::new();
    for (i, d) in derivations(&lang, &fx).into_iter().enumerate() {
        let derivation = match d {
            Some(d) if check_derivation(&th, &d).is_accepted() => Status::Proved,
            _ => Status::Unknown,
        };
        let (status, witness) = oracle(&fx.terms[i], &fx.terms[i + 1], &stores, (bound_l, bound_r))?;
        out.push(LinkReport {
            link: ChainLink { lhs: names[i], rhs: names[i + 1] },
            derivation,
            oracle: status,
            witness,
            bounds: (bound_l, bound_r),
        });
    }
    let (status, witness) = oracle(&fx.terms[4], &fx.terms[0], &stores, (bound_l, bound_r))?;
    out.push(LinkReport {
        link: ChainLink { lhs: "Spec", rhs: "Impl" },
        derivation: Status::Unknown,
        oracle: status,
        witness,
        bounds: (bound_l, bound_r),
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Sem(#[from] SemError),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squash(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    #[test]
    fn listings_round_trip() {
        for text in [IMPL_LISTING, SPEC_LISTING] {
            let p = parse_program(text).unwrap();
            assert_eq!(squash(&p.to_string()), squash(text));
            assert_eq!(parse_program(&p.to_string()).unwrap(), p);
        }
        assert!(parse_program(IMPL_LISTING).unwrap().body.is_imperative());
        assert!(!parse_program(SPEC_LISTING).unwrap().body.is_imperative());
    }

    #[test]
    fn spec_is_some_or_of_fragments() {
        let lang = ServerLang::new(1, 3);
        let fx = fixtures(&lang).unwrap();
        let Stmt::Seq(a, o3) = &fx.l3 else { panic!() };
        assert_eq!(fx.spec_program.body, Stmt::Some(Box::new(Stmt::Or(a.clone(), o3.clone()))));
    }

    #[test]
    fn derivations_are_accepted() {
        let lang = ServerLang::new(1, 3);
        let fx = fixtures(&lang).unwrap();
        let th = refine_theory();
        for (i, d) in derivations(&lang, &fx).into_iter().enumerate() {
            let d = d.unwrap_or_else(|| panic!("link {i} has no derivation"));
            let verdict = check_derivation(&th, &d);
            assert!(verdict.is_accepted(), "link {i}: {verdict:?}");
            assert_eq!((d.lhs(), d.rhs()), (&fx.terms[i], &fx.terms[i + 1]));
        }
    }

    #[test]
    fn chain_with_one_connection() {
        let reports = verify_chain(1, 2, 4).unwrap();
        let verdicts: Vec<Status> = reports.iter().map(LinkReport::verdict).collect();
        assert_eq!(verdicts[..4], [Status::Proved; 4]);
        assert_eq!(verdicts[4], Status::Refuted);
        assert!(reports[4].witness.is_some());
    }
}
