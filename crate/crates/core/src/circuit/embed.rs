//! The four embeddings of circuits, their metrics, and the property report.

use std::sync::Arc;

use rand::Rng;

use super::Circuit;
use crate::error::{FoldError, SemError};
use crate::fold::{Algebra, Folded};
use crate::func::stdlib::{andb, first, negb, orb, second};
use crate::func::FnRef;
use crate::report::{Finding, Status};
use crate::semantics::{powerset_interpret, Env, OutcomeModel, ReaderVal};
use crate::term::{Continuation, EffectOp, EffectSig, NodeKind, Term, Vocabulary};
use crate::theory::{prove_bounded, Judgment, Relation, Theory, TheoryId};
use crate::value::{FiniteType, TypeRef, Value};

pub const DATA_EFF: &str = "DataEff";
pub const GET_DATA: &str = "GetData";

/// Vocabularies for circuits over a declared set of variables.
#[derive(Clone, Debug)]
pub struct CircuitLang {
    vars: Vec<String>,
    var_ty: TypeRef,
    reified: Vocabulary,
    freer: Vocabulary,
}

impl CircuitLang {
    pub fn new<S: AsRef<str>>(vars: &[S]) -> Self {
        let names: Vec<&str> = vars.iter().map(AsRef::as_ref).collect();
        let var_ty = FiniteType::symbols("var", &names);
        let sig = EffectSig::new(DATA_EFF, vec![EffectOp::fixed(GET_DATA, vec![var_ty.clone()], FiniteType::bool())])
            .expect("single operation");
        let reified = Vocabulary::of(&[NodeKind::Pure, NodeKind::FMap, NodeKind::LiftA2])
            .with_effect(sig.clone())
            .expect("fresh vocabulary");
        let freer = Vocabulary::of(&[NodeKind::Pure, NodeKind::Bind])
            .with_effect(sig)
            .expect("fresh vocabulary");
        CircuitLang {
            vars: names.iter().map(|s| s.to_string()).collect(),
            var_ty,
            reified,
            freer,
        }
    }

    /// Declares exactly the variables of `c`.
    pub fn for_circuit(c: &Circuit) -> Self {
        let vars: Vec<String> = c.vars().into_iter().collect();
        Self::new(&vars)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_type(&self) -> &TypeRef {
        &self.var_ty
    }

    /// `{Pure, FMap, LiftA2, DataEff}`.
    pub fn reified(&self) -> &Vocabulary {
        &self.reified
    }

    /// `{Pure, Bind, DataEff}`.
    pub fn freer(&self) -> &Vocabulary {
        &self.freer
    }

    fn get(&self, v: &Vocabulary, x: &str) -> Term {
        v.effect(DATA_EFF, GET_DATA, vec![Value::sym(x)])
            .unwrap_or_else(|e| panic!("variable {x} is not declared: {e}"))
    }
}

fn eval(c: &Circuit, env: &Env) -> Result<bool, SemError> {
    Ok(match c {
        Circuit::Lit(b) => *b,
        Circuit::Var(x) => env
            .get(x)
            .and_then(Value::as_bool)
            .ok_or_else(|| SemError::UnboundVar(x.clone()))?,
        Circuit::Neg(a) => !eval(a, env)?,
        Circuit::And(a, b) => eval(a, env)? && eval(b, env)?,
        Circuit::Or(a, b) => eval(a, env)? || eval(b, env)?,
    })
}

/// Shallow embedding: a reader of variable values.
pub fn embed_shallow(c: &Circuit) -> ReaderVal {
    let c = c.clone();
    Arc::new(move |env: &Env| eval(&c, env).map(Value::Bool))
}

/// Deep embedding: the syntax tree itself.
pub fn embed_deep(c: &Circuit) -> Circuit {
    c.clone()
}

/// Monadic embedding: every read is `Bind (GetData x) Ret`.
pub fn embed_freer(lang: &CircuitLang, c: &Circuit) -> Term {
    let v = lang.freer();
    let b = FiniteType::bool();
    let ret = |x: bool| v.pure(&b, Value::Bool(x)).expect("bool value");
    let then = |m: &Term, f: &dyn Fn(bool) -> Term| {
        v.bind(m, Continuation::tabulate(&b, |x| f(x == &Value::Bool(true))), &b)
            .expect("bool continuation")
    };
    match c {
        Circuit::Lit(x) => ret(*x),
        Circuit::Var(x) => then(&lang.get(v, x), &|y| ret(y)),
        Circuit::Neg(a) => then(&embed_freer(lang, a), &|y| ret(!y)),
        Circuit::And(a, b2) | Circuit::Or(a, b2) => {
            let is_and = matches!(c, Circuit::And(..));
            let rhs = embed_freer(lang, b2);
            then(&embed_freer(lang, a), &|x| {
                then(&rhs, &|y| ret(if is_and { x && y } else { x || y }))
            })
        }
    }
}

/// Applicative embedding: gates become `FMap negb` and `LiftA2 andb/orb`.
pub fn embed_reified(lang: &CircuitLang, c: &Circuit) -> Term {
    let v = lang.reified();
    match c {
        Circuit::Lit(x) => v.pure(&FiniteType::bool(), Value::Bool(*x)).expect("bool value"),
        Circuit::Var(x) => lang.get(v, x),
        Circuit::Neg(a) => v.fmap(&negb(), &embed_reified(lang, a)).expect("bool term"),
        Circuit::And(a, b) => v
            .lift_a2(&andb(), &embed_reified(lang, a), &embed_reified(lang, b))
            .expect("bool terms"),
        Circuit::Or(a, b) => v
            .lift_a2(&orb(), &embed_reified(lang, a), &embed_reified(lang, b))
            .expect("bool terms"),
    }
}

fn metric(leaf_effect: u32, fmap: fn(u32) -> u32, lift: fn(u32, u32) -> u32) -> Algebra<u32> {
    Algebra::new()
        .with_case(NodeKind::Pure, |_, _| Ok(0))
        .with_case(NodeKind::Effect(DATA_EFF.into()), move |_, _| Ok(leaf_effect))
        .with_case(NodeKind::FMap, move |_, f| match f {
            Folded::One(a) => Ok(fmap(a)),
            _ => Err(FoldError::Domain("fmap".into())),
        })
        .with_case(NodeKind::LiftA2, move |_, f| match f {
            Folded::Two(a, b) => Ok(lift(a, b)),
            _ => Err(FoldError::Domain("liftA2".into())),
        })
}

/// Gate depth of a reified term.
pub fn app_depth(t: &Term) -> Result<u32, FoldError> {
    metric(0, |a| a + 1, |a, b| 1 + a.max(b)).fold(t)
}

/// Number of effect calls in a reified term.
pub fn app_num_var(t: &Term) -> Result<u32, FoldError> {
    metric(1, |a| a, |a, b| a + b).fold(t)
}

/// A random term over the reified vocabulary, not necessarily the image of
/// a circuit: binary nodes pick from several boolean functions.
pub fn random_reified_term(rng: &mut impl Rng, lang: &CircuitLang, depth: u32) -> Term {
    let v = lang.reified();
    let b = FiniteType::bool();
    if depth == 0 || rng.gen_ratio(1, 4) {
        return if lang.vars.is_empty() || rng.gen_ratio(1, 3) {
            v.pure(&b, Value::Bool(rng.gen())).expect("bool value")
        } else {
            let x = &lang.vars[rng.gen_range(0..lang.vars.len())];
            lang.get(v, x)
        };
    }
    if rng.gen_ratio(1, 5) {
        return v.fmap(&negb(), &random_reified_term(rng, lang, depth - 1)).expect("bool term");
    }
    let fs: [FnRef; 4] = [andb(), orb(), first(&b, &b), second(&b, &b)];
    let f = &fs[rng.gen_range(0..fs.len())];
    let l = random_reified_term(rng, lang, depth - 1);
    let r = random_reified_term(rng, lang, depth - 1);
    v.lift_a2(f, &l, &r).expect("bool terms")
}

fn prove(id: TheoryId, lhs: &Term, rhs: &Term, depth: usize) -> Finding {
    let j = Judgment {
        rel: Relation::Equiv,
        lhs: lhs.clone(),
        rhs: rhs.clone(),
    };
    match prove_bounded(&Theory::of(&[id]), &j, depth) {
        Some(d) => Finding::new(id.name(), Status::Proved).with_witness(d.outline()),
        None => Finding::new(id.name(), Status::Unknown),
    }
}

fn named(prefix: &str, f: Finding) -> Finding {
    Finding {
        name: format!("{prefix}/{}", f.name),
        ..f
    }
}

/// The four questions about a circuit `c`:
/// (1) `c ≅ c ∧ c`, (2) `c ≅ c ∧ true`, (3) `c ∧ u ≅ u ∧ c` for a fresh
/// variable `u` (so both sides read in opposite orders), and (4)
/// `numVar ≤ 2^depth` for the reified embedding of `c`.
pub fn check_properties(c: &Circuit, search_depth: usize) -> Result<Vec<Finding>, SemError> {
    let vars = c.vars();
    let fresh = (0..).map(|i| format!("u{i}")).find(|x| !vars.contains(x)).expect("infinite");
    let (t, u) = (c.clone(), Circuit::Var(fresh));
    let mut all = c.vars();
    all.extend(u.vars());
    let lang = CircuitLang::new(&all.into_iter().collect::<Vec<_>>());
    let e = |c: &Circuit| embed_reified(&lang, c);
    let mut out = Vec::new();

    let (c1, cc) = (e(c), e(&Circuit::and(c.clone(), c.clone())));
    for id in TheoryId::ALL {
        out.push(named("1", prove(id, &c1, &cc, search_depth)));
    }
    let model = OutcomeModel::fresh();
    let lhs = powerset_interpret(&c1, &model, 1)?;
    let rhs = powerset_interpret(&cc, &model, 1)?;
    let oracle = match lhs.iter().find(|b| !rhs.contains(b)) {
        Some(b) => Finding::new("1/oracle", Status::Refuted).with_witness(format!("only lhs: {b}")),
        None => match rhs.iter().find(|b| !lhs.contains(b)) {
            Some(b) => Finding::new("1/oracle", Status::Refuted).with_witness(format!("only rhs: {b}")),
            None => Finding::new("1/oracle", Status::Unknown),
        },
    };
    out.push(oracle);

    let ct = e(&Circuit::and(c.clone(), Circuit::Lit(true)));
    out.push(named("2", prove(TheoryId::Statically, &c1, &ct, search_depth)));

    let (tu, ut) = (e(&Circuit::and(t.clone(), u.clone())), e(&Circuit::and(u, t)));
    out.push(named("3", prove(TheoryId::Statically, &tu, &ut, search_depth)));
    out.push(named("3", prove(TheoryId::StaticallyInParallel, &tu, &ut, search_depth)));

    let depth = app_depth(&c1)?;
    let nv = app_num_var(&c1)?;
    let holds = (nv as u64) <= 1u64 << depth.min(63);
    out.push(
        Finding::new("4/height-and-var", if holds { Status::Proved } else { Status::Refuted })
            .with_witness(format!("numVar {nv}, depth {depth}")),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::semantics::{interpret, reader};
    use crate::value::for_each_assignment;
    use crate::Node;

    #[test]
    fn reified_and_freer_shapes() {
        let lang = CircuitLang::new(&["x"]);
        let t = embed_reified(&lang, &parse_circuit("x & true").unwrap());
        let Node::LiftA2 { f, left, right } = t.node() else { panic!("{t}") };
        assert_eq!(f.name(), "andb");
        assert_eq!(left.kind(), NodeKind::Effect(DATA_EFF.into()));
        assert_eq!(right.node(), &Node::Pure(Value::Bool(true)));
        assert_eq!((app_depth(&t).unwrap(), app_num_var(&t).unwrap()), (1, 1));
        let m = embed_freer(&lang, &Circuit::var("x"));
        assert!(matches!(m.node(), Node::Bind { .. }));
        assert_eq!(embed_deep(&Circuit::Lit(true)), Circuit::Lit(true));
    }

    #[test]
    fn reader_agrees_with_shallow_and_freer() {
        let lang = CircuitLang::new(&["x", "y", "z"]);
        let c = parse_circuit("!x | y & (z | !y)").unwrap();
        let a = interpret(&embed_reified(&lang, &c), &reader(DATA_EFF)).unwrap();
        let s = embed_shallow(&c);
        let b = FiniteType::bool();
        for_each_assignment(&[b.clone(), b.clone(), b], |vals| -> Result<(), ()> {
            let env: Env = ["x", "y", "z"].iter().map(|s| s.to_string()).zip(vals.iter().cloned()).collect();
            assert_eq!(a(&env).unwrap(), s(&env).unwrap());
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn properties_of_and_true() {
        let got = check_properties(&parse_circuit("x & true").unwrap(), 4).unwrap();
        let status = |n: &str| got.iter().find(|f| f.name == n).unwrap().status;
        for id in TheoryId::ALL {
            assert_eq!(status(&format!("1/{}", id.name())), Status::Unknown);
        }
        assert_eq!(status("1/oracle"), Status::Refuted);
        assert_eq!(status("2/statically"), Status::Proved);
        assert_eq!(status("3/statically"), Status::Unknown);
        assert_eq!(status("3/statically-in-parallel"), Status::Proved);
        assert_eq!(status("4/height-and-var"), Status::Proved);
    }

    #[test]
    fn association_changes_depth() {
        let lang = CircuitLang::new(&["x", "y", "z", "w"]);
        let l = embed_reified(&lang, &parse_circuit("x & y & z & w").unwrap());
        let r = embed_reified(&lang, &parse_circuit("(x & y) & (z & w)").unwrap());
        assert_eq!((app_depth(&l).unwrap(), app_depth(&r).unwrap()), (3, 2));
        let j = Judgment { rel: Relation::Equiv, lhs: l, rhs: r };
        assert!(prove_bounded(&Theory::of(&[TheoryId::StaticallyInParallel]), &j, 4).is_none());
    }
}
