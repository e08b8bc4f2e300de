//! Data-fetching cost analysis: batched `liftA2` and sequential `bind` over
//! a read-only key/value store.
//!
//! Program files hold a key declaration followed by one term:
//!
//! ```text
//! (keys x y)
//! (bind (effect DataEff GetData x) (k (_ (effect DataEff GetData y))))
//! ```

use std::sync::Arc;

use crate::error::{ParseError, SemError, TermError};
use crate::fold::{AlgCase, Algebra};
use crate::func::stdlib::pair;
use crate::semantics::{interpret, update, Cost, Env, UpdateVal};
use crate::sexpr::{parse_all, Registry, SExpr};
use crate::term::{Continuation, EffectOp, EffectSig, NodeKind, Term, Vocabulary};
use crate::value::{FiniteType, TypeRef, Value};

pub const DATA_EFF: &str = "DataEff";
pub const GET_DATA: &str = "GetData";

/// Cost of one run: the result, database rounds, and individual requests.
pub type CostReport = Cost;

/// The fetch vocabulary `{Pure, LiftA2, Bind, DataEff}` over declared keys.
/// Fetched values are small naturals.
#[derive(Clone, Debug)]
pub struct FetchLang {
    keys: Vec<String>,
    value_ty: TypeRef,
    vocab: Vocabulary,
}

impl FetchLang {
    pub fn new<S: AsRef<str>>(keys: &[S]) -> Self {
        let names: Vec<&str> = keys.iter().map(AsRef::as_ref).collect();
        let key_ty = FiniteType::symbols("key", &names);
        let value_ty = FiniteType::default_nat();
        let sig = EffectSig::new(DATA_EFF, vec![EffectOp::fixed(GET_DATA, vec![key_ty], value_ty.clone())])
            .expect("single operation");
        let vocab = Vocabulary::of(&[NodeKind::Pure, NodeKind::LiftA2, NodeKind::Bind])
            .with_effect(sig)
            .expect("fresh vocabulary");
        FetchLang {
            keys: names.iter().map(|s| s.to_string()).collect(),
            value_ty,
            vocab,
        }
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn value_type(&self) -> &TypeRef {
        &self.value_ty
    }

    pub fn get(&self, key: &str) -> Result<Term, TermError> {
        self.vocab.effect(DATA_EFF, GET_DATA, vec![Value::sym(key)])
    }

    pub fn registry(&self) -> Registry {
        let mut r = Registry::new(self.vocab.clone());
        r.add_fn(pair(&self.value_ty, &self.value_ty));
        r
    }
}

/// Parses `(keys k..)` followed by a program term.
pub fn parse_program(text: &str) -> Result<(FetchLang, Term), ParseError> {
    let items = parse_all(text)?;
    let [decl, body] = items.as_slice() else {
        return Err(ParseError::Malformed {
            what: "program",
            text: "expected (keys ..) and one term".into(),
        });
    };
    let keys = decl
        .headed("keys")
        .ok_or_else(|| ParseError::Malformed {
            what: "key declaration",
            text: decl.to_string(),
        })?
        .iter()
        .map(|k| {
            k.as_atom().map(str::to_string).ok_or_else(|| ParseError::Malformed {
                what: "key",
                text: k.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lang = FetchLang::new(&keys);
    let t = lang.registry().term_from_sexpr(body)?;
    Ok((lang, t))
}

/// Prints a program in the format read by [`parse_program`].
pub fn print_program(lang: &FetchLang, t: &Term) -> String {
    let keys: Vec<SExpr> = std::iter::once(SExpr::atom("keys"))
        .chain(lang.keys.iter().map(SExpr::atom))
        .collect();
    format!("{}\n{t}\n", SExpr::List(keys))
}

/// A cost analyzer assembled from one algebra case per node kind.
#[derive(Clone)]
pub struct Analyzer {
    vocab: Vocabulary,
    alg: Algebra<UpdateVal>,
}

impl Analyzer {
    /// Batched: `liftA2` costs the max of its operands' rounds.
    pub fn new(lang: &FetchLang) -> Self {
        Self::assemble(lang, update::lift_a2())
    }

    /// Unbatched: `liftA2` costs the sum, as if it were sequenced by `bind`.
    pub fn sequential(lang: &FetchLang) -> Self {
        Self::assemble(lang, update::lift_a2_sequential())
    }

    fn assemble(lang: &FetchLang, lift: AlgCase<UpdateVal>) -> Self {
        let mut alg = Algebra::new();
        alg.insert(NodeKind::Pure, update::pure());
        alg.insert(NodeKind::LiftA2, lift);
        alg.insert(NodeKind::Bind, update::bind());
        alg.insert(NodeKind::Effect(DATA_EFF.into()), update::get(DATA_EFF));
        Analyzer {
            vocab: lang.vocab.clone(),
            alg,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn algebra(&self) -> &Algebra<UpdateVal> {
        &self.alg
    }

    /// Adds one effect and its case; no existing case is touched.
    pub fn extend_with_effect(&self, sig: Arc<EffectSig>, case: AlgCase<UpdateVal>) -> Result<Analyzer, TermError> {
        if self.vocab.effect_signature(sig.name()).is_some() {
            return Err(TermError::DuplicateEffectName(sig.name().into()));
        }
        let kind = NodeKind::Effect(sig.name().into());
        let vocab = self.vocab.clone().with_effect(sig)?;
        let mut alg = self.alg.clone();
        alg.insert(kind, case);
        Ok(Analyzer { vocab, alg })
    }

    /// Whether every case of `self` is present, by identity, in `other`.
    pub fn cases_preserved_in(&self, other: &Analyzer) -> bool {
        self.alg.kinds().all(|k| match (self.alg.case(k), other.alg.case(k)) {
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        })
    }

    pub fn analyze(&self, t: &Term, db: &Env) -> Result<CostReport, SemError> {
        self.vocab.admits(t)?;
        interpret(t, &self.alg)?(db)
    }
}

/// The three reference programs: two dependent fetches, two batched
/// fetches, and no fetch. Keys `x` and `y` must be declared.
pub fn fixtures(lang: &FetchLang) -> Result<Vec<(&'static str, Term)>, TermError> {
    let v = lang.vocab();
    let (x, y) = (lang.get("x")?, lang.get("y")?);
    let seq = v.bind(&x, Continuation::constant(x.ty(), &y), y.ty())?;
    let batched = v.lift_a2(&pair(&lang.value_ty, &lang.value_ty), &x, &y)?;
    let pure = v.pure(&lang.value_ty, Value::Nat(0))?;
    Ok(vec![("sequential", seq), ("batched", batched), ("pure", pure)])
}
