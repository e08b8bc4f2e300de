//! Canonical s-expression text for values and terms.
//!
//! Terms print one node per parenthesized group:
//! `(liftA2 andb (effect DataEff GetData x) (pure true))`. Names of functions,
//! types and effects are resolved through a [`Registry`] when parsing.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::ParseError;
use crate::func::{stdlib, FnRef, Func};
use crate::term::{Continuation, EffectOp, EffectSig, Node, NodeKind, Term, Vocabulary};
use crate::value::{same_type, FiniteType, Shape, TypeRef, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(s: impl Into<String>) -> Self {
        SExpr::Atom(s.into())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            SExpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            SExpr::Atom(_) => None,
        }
    }

    /// `(head ...)` with the given head atom.
    pub fn headed(&self, head: &str) -> Option<&[SExpr]> {
        match self.as_list() {
            Some([SExpr::Atom(h), rest @ ..]) if h == head => Some(rest),
            _ => None,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => write!(f, "{a}"),
            SExpr::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses a sequence of s-expressions. `;` starts a line comment.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<(usize, Vec<SExpr>)> = Vec::new();
    let mut top = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push((i, Vec::new()));
                i += 1;
            }
            b')' => {
                let (_, items) = stack.pop().ok_or(ParseError::Syntax {
                    pos: i,
                    msg: "unbalanced ')'".into(),
                })?;
                let e = SExpr::List(items);
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(e),
                    None => top.push(e),
                }
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'(' | b')' | b';')
                {
                    i += 1;
                }
                let e = SExpr::Atom(text[start..i].to_string());
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(e),
                    None => top.push(e),
                }
            }
        }
    }
    if let Some((pos, _)) = stack.last() {
        return Err(ParseError::Syntax {
            pos: *pos,
            msg: "unclosed '('".into(),
        });
    }
    Ok(top)
}

/// Parses exactly one s-expression.
pub fn parse_one(text: &str) -> Result<SExpr, ParseError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(ParseError::Syntax {
            pos: 0,
            msg: "empty input".into(),
        }),
        _ => Err(ParseError::Syntax {
            pos: 0,
            msg: "expected a single expression".into(),
        }),
    }
}

fn malformed(what: &'static str, e: &SExpr) -> ParseError {
    ParseError::Malformed {
        what,
        text: e.to_string(),
    }
}

/// Reads a value printed by `Value`'s `Display`.
pub fn value_from_sexpr(e: &SExpr) -> Result<Value, ParseError> {
    match e {
        SExpr::Atom(a) => Ok(match a.as_str() {
            "tt" => Value::Unit,
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => match a.parse::<u32>() {
                Ok(n) => Value::Nat(n),
                Err(_) => Value::Sym(a.clone()),
            },
        }),
        SExpr::List(items) => {
            let (head, rest) = match items.split_first() {
                Some((SExpr::Atom(h), rest)) => (h.as_str(), rest),
                _ => return Err(malformed("value", e)),
            };
            match head {
                "list" => Ok(Value::List(
                    rest.iter().map(value_from_sexpr).collect::<Result<_, _>>()?,
                )),
                "inl" | "inr" if rest.len() == 1 => {
                    let v = Box::new(value_from_sexpr(&rest[0])?);
                    Ok(if head == "inl" {
                        Value::Left(v)
                    } else {
                        Value::Right(v)
                    })
                }
                "record" => {
                    let mut fields = BTreeMap::new();
                    for f in rest {
                        match f.as_list() {
                            Some([SExpr::Atom(k), v]) => {
                                fields.insert(k.clone(), value_from_sexpr(v)?);
                            }
                            _ => return Err(malformed("record field", f)),
                        }
                    }
                    Ok(Value::Record(fields))
                }
                "map" => {
                    let mut table = BTreeMap::new();
                    for f in rest {
                        match f.as_list() {
                            Some([k, v]) => {
                                table.insert(value_from_sexpr(k)?, value_from_sexpr(v)?);
                            }
                            _ => return Err(malformed("map entry", f)),
                        }
                    }
                    Ok(Value::Map(table))
                }
                _ => Err(malformed("value", e)),
            }
        }
    }
}

pub fn parse_value(text: &str) -> Result<Value, ParseError> {
    value_from_sexpr(&parse_one(text)?)
}

fn inferred_type(v: &Value) -> Option<TypeRef> {
    match v {
        Value::Unit => Some(FiniteType::unit()),
        Value::Bool(_) => Some(FiniteType::bool()),
        Value::Nat(n) if *n <= crate::value::DEFAULT_NAT_MAX => Some(FiniteType::default_nat()),
        _ => None,
    }
}

pub fn term_to_sexpr(t: &Term) -> SExpr {
    let a = |s: &str| SExpr::atom(s);
    let val = |v: &Value| parse_one(&v.to_string()).expect("values print as s-expressions");
    let ty = |t: &TypeRef| parse_one(t.name()).unwrap_or_else(|_| SExpr::atom(t.name()));
    match t.node() {
        Node::Pure(v) => {
            let mut items = vec![a("pure"), val(v)];
            if !inferred_type(v).is_some_and(|i| same_type(&i, t.ty())) {
                items.push(a(":"));
                items.push(ty(t.ty()));
            }
            SExpr::List(items)
        }
        Node::FMap { g, arg } => SExpr::List(vec![a("fmap"), a(g.name()), term_to_sexpr(arg)]),
        Node::LiftA2 { f, left, right } => SExpr::List(vec![
            a("liftA2"),
            a(f.name()),
            term_to_sexpr(left),
            term_to_sexpr(right),
        ]),
        Node::SelectBy {
            f,
            scrutinee,
            handler,
        } => SExpr::List(vec![
            a("selectBy"),
            a(f.name()),
            term_to_sexpr(scrutinee),
            term_to_sexpr(handler),
        ]),
        Node::Bind { m, k } => {
            let cont = match k {
                Continuation::Table(table) => {
                    let mut items = vec![a("k")];
                    for (v, next) in table.iter() {
                        items.push(SExpr::List(vec![val(v), term_to_sexpr(next)]));
                    }
                    SExpr::List(items)
                }
                Continuation::Opaque { name, .. } => a(&format!("<{name}>")),
            };
            SExpr::List(vec![a("bind"), term_to_sexpr(m), cont])
        }
        Node::KPlus(x) => SExpr::List(vec![a("kplus"), term_to_sexpr(x)]),
        Node::Plus(x, y) => SExpr::List(vec![a("plus"), term_to_sexpr(x), term_to_sexpr(y)]),
        Node::Effect { sig, op, args } => {
            let mut items = vec![a("effect"), a(sig.name()), a(op)];
            items.extend(args.iter().map(val));
            if sig.op(op).is_some_and(|o| o.result.is_none()) {
                items.push(a(":"));
                items.push(ty(t.ty()));
            }
            SExpr::List(items)
        }
    }
}

pub fn term_to_string(t: &Term) -> String {
    term_to_sexpr(t).to_string()
}

/// Names for types and functions, plus the vocabulary terms are built in.
#[derive(Clone)]
pub struct Registry {
    types: BTreeMap<String, TypeRef>,
    funcs: BTreeMap<String, FnRef>,
    vocab: Vocabulary,
}

impl Registry {
    pub fn new(vocab: Vocabulary) -> Self {
        let mut r = Registry {
            types: BTreeMap::new(),
            funcs: BTreeMap::new(),
            vocab,
        };
        for t in [FiniteType::unit(), FiniteType::bool(), FiniteType::default_nat()] {
            r.add_type(t);
        }
        let b = FiniteType::bool();
        for f in [
            stdlib::andb(),
            stdlib::orb(),
            stdlib::negb(),
            stdlib::first(&b, &b),
            stdlib::second(&b, &b),
            stdlib::pair(&b, &b),
            stdlib::identity(&b),
        ] {
            r.add_fn(f);
        }
        r
    }

    pub fn add_type(&mut self, t: TypeRef) {
        self.types.insert(t.name().to_string(), t);
    }

    pub fn add_fn(&mut self, f: FnRef) {
        self.add_type(f.codomain().clone());
        for d in f.domain() {
            self.add_type(d.clone());
        }
        self.funcs.insert(f.name().to_string(), f);
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn function(&self, name: &str) -> Result<FnRef, ParseError> {
        if let Some(f) = self.funcs.get(name) {
            return Ok(f.clone());
        }
        if let Some(inner) = name.strip_prefix("flip.") {
            return Ok(Func::flip(&self.function(inner)?)?);
        }
        Err(ParseError::Unknown {
            what: "function",
            name: name.into(),
        })
    }

    pub fn resolve_type(&self, e: &SExpr) -> Result<TypeRef, ParseError> {
        if let Some(t) = self.types.get(&e.to_string()) {
            return Ok(t.clone());
        }
        match e {
            SExpr::Atom(a) => {
                if let Some(n) = a.strip_prefix("nat").and_then(|n| n.parse::<u32>().ok()) {
                    if n >= 1 {
                        return Ok(FiniteType::nat(n - 1));
                    }
                }
                Err(ParseError::Unknown {
                    what: "type",
                    name: a.clone(),
                })
            }
            SExpr::List(items) => match items.as_slice() {
                [l, SExpr::Atom(op), r] if op == "+" || op == "*" || op == "->" => {
                    let (l, r) = (self.resolve_type(l)?, self.resolve_type(r)?);
                    Ok(match op.as_str() {
                        "+" => FiniteType::either(&l, &r),
                        "*" => FiniteType::product(&l, &r),
                        _ => FiniteType::function(&l, &r),
                    })
                }
                [SExpr::Atom(h), elem, SExpr::Atom(n)] if h == "list" => {
                    let max = n.parse().map_err(|_| malformed("list bound", e))?;
                    Ok(FiniteType::list(&self.resolve_type(elem)?, max))
                }
                _ => Err(malformed("type", e)),
            },
        }
    }

    fn type_of_value(&self, v: &Value) -> Option<TypeRef> {
        inferred_type(v).or_else(|| {
            self.types
                .values()
                .find(|t| matches!(t.shape(), Shape::Atomic) && t.contains(v))
                .cloned()
        })
    }

    /// Splits a trailing `: T` annotation off an argument list.
    fn annotation<'a>(&self, items: &'a [SExpr]) -> Result<(&'a [SExpr], Option<TypeRef>), ParseError> {
        match items {
            [rest @ .., SExpr::Atom(colon), ty] if colon == ":" => {
                Ok((rest, Some(self.resolve_type(ty)?)))
            }
            _ => Ok((items, None)),
        }
    }

    pub fn term_from_sexpr(&self, e: &SExpr) -> Result<Term, ParseError> {
        let items = e.as_list().ok_or_else(|| malformed("term", e))?;
        let (head, rest) = match items.split_first() {
            Some((SExpr::Atom(h), rest)) => (h.as_str(), rest),
            _ => return Err(malformed("term", e)),
        };
        let v = &self.vocab;
        let fname = |x: &SExpr| {
            x.as_atom()
                .ok_or_else(|| malformed("function name", x))
                .and_then(|n| self.function(n))
        };
        let t = match (head, rest) {
            ("pure", _) => {
                let (args, ann) = self.annotation(rest)?;
                let [value] = args else {
                    return Err(malformed("pure", e));
                };
                let value = value_from_sexpr(value)?;
                let ty = ann
                    .or_else(|| self.type_of_value(&value))
                    .ok_or_else(|| malformed("untyped pure value", e))?;
                v.pure(&ty, value)?
            }
            ("fmap", [g, a]) => v.fmap(&fname(g)?, &self.term_from_sexpr(a)?)?,
            ("liftA2", [f, a, b]) => {
                v.lift_a2(&fname(f)?, &self.term_from_sexpr(a)?, &self.term_from_sexpr(b)?)?
            }
            ("selectBy", [f, a, b]) => {
                let f = fname(f)?;
                let result = match f.codomain().shape() {
                    Shape::Sum(_, r) => r.clone(),
                    _ => return Err(malformed("selectBy dispatcher", e)),
                };
                v.select_by(&f, &self.term_from_sexpr(a)?, &self.term_from_sexpr(b)?, &result)?
            }
            ("bind", [m, k]) => {
                let m = self.term_from_sexpr(m)?;
                let branches = k.headed("k").ok_or_else(|| malformed("continuation", k))?;
                let mut table = BTreeMap::new();
                let mut default = None;
                for b in branches {
                    match b.as_list() {
                        // `(_ t)` covers every value without its own branch
                        Some([SExpr::Atom(w), t]) if w == "_" => default = Some(self.term_from_sexpr(t)?),
                        Some([x, t]) => {
                            table.insert(value_from_sexpr(x)?, self.term_from_sexpr(t)?);
                        }
                        _ => return Err(malformed("continuation branch", b)),
                    }
                }
                if let Some(d) = default {
                    for x in m.ty().carrier() {
                        table.entry(x.clone()).or_insert_with(|| d.clone());
                    }
                }
                let result = table
                    .values()
                    .next()
                    .map(|t: &Term| t.ty().clone())
                    .ok_or_else(|| malformed("empty continuation", k))?;
                v.bind(&m, Continuation::Table(std::sync::Arc::new(table)), &result)?
            }
            ("kplus", [a]) => v.kplus(&self.term_from_sexpr(a)?)?,
            ("plus", [a, b]) => v.plus(&self.term_from_sexpr(a)?, &self.term_from_sexpr(b)?)?,
            ("effect", [sig, op, ..]) => {
                let (sig, op) = (
                    sig.as_atom().ok_or_else(|| malformed("effect name", sig))?,
                    op.as_atom().ok_or_else(|| malformed("operation name", op))?,
                );
                let (args, ann) = self.annotation(&rest[2..])?;
                let args = args.iter().map(value_from_sexpr).collect::<Result<Vec<_>, _>>()?;
                match ann {
                    Some(ty) => v.effect_typed(sig, op, args, &ty)?,
                    None => v.effect(sig, op, args)?,
                }
            }
            _ => return Err(malformed("term", e)),
        };
        Ok(t)
    }

    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        self.term_from_sexpr(&parse_one(text)?)
    }
}

/// Parses a term file: declarations, then one term over every node kind.
///
/// ```text
/// (vars t u)                      ; DataEff.GetData : var -> bool
/// (effect Coin (flip bool))       ; zero-argument operations
/// (liftA2 andb (effect DataEff GetData t) (effect DataEff GetData u))
/// ```
pub fn parse_term_file(text: &str) -> Result<Term, ParseError> {
    let items = parse_all(text)?;
    let Some((body, decls)) = items.split_last() else {
        return Err(ParseError::Malformed {
            what: "term file",
            text: "no term".into(),
        });
    };
    let kinds = [
        NodeKind::Pure,
        NodeKind::FMap,
        NodeKind::LiftA2,
        NodeKind::SelectBy,
        NodeKind::Bind,
        NodeKind::KPlus,
        NodeKind::Plus,
    ];
    let mut vocab = Vocabulary::of(&kinds);
    let probe = Registry::new(Vocabulary::new());
    for d in decls {
        let sig = if let Some(vars) = d.headed("vars") {
            let names = vars
                .iter()
                .map(|x| x.as_atom().ok_or_else(|| malformed("variable", x)))
                .collect::<Result<Vec<_>, _>>()?;
            let var_ty = FiniteType::symbols("var", &names);
            EffectSig::new("DataEff", vec![EffectOp::fixed("GetData", vec![var_ty], FiniteType::bool())])?
        } else if let Some([name, ops @ ..]) = d.headed("effect") {
            let name = name.as_atom().ok_or_else(|| malformed("effect name", name))?;
            let ops = ops
                .iter()
                .map(|op| match op.as_list() {
                    Some([SExpr::Atom(op), ty]) => Ok(EffectOp::fixed(op, vec![], probe.resolve_type(ty)?)),
                    _ => Err(malformed("operation declaration", op)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            EffectSig::new(name, ops)?
        } else {
            return Err(malformed("declaration", d));
        };
        vocab = vocab.with_effect(sig)?;
    }
    Registry::new(vocab).term_from_sexpr(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{EffectOp, EffectSig, NodeKind};

    fn registry() -> Registry {
        let sig = EffectSig::new(
            "DataEff",
            vec![EffectOp::fixed(
                "GetData",
                vec![FiniteType::symbols("var", &["x", "y", "z"])],
                FiniteType::bool(),
            )],
        )
        .unwrap();
        let vocab = Vocabulary::of(&[
            NodeKind::Pure,
            NodeKind::FMap,
            NodeKind::LiftA2,
            NodeKind::Bind,
            NodeKind::Plus,
            NodeKind::KPlus,
        ])
        .with_effect(sig)
        .unwrap();
        Registry::new(vocab)
    }

    #[test]
    fn values_round_trip() {
        for text in [
            "tt",
            "true",
            "3",
            "READING",
            "(record (id 1) (state READING))",
            "(list 1 2 (list))",
            "(inl (inr false))",
            "(map (false true) (true false))",
        ] {
            assert_eq!(parse_value(text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn terms_round_trip() {
        let r = registry();
        for text in [
            "(liftA2 andb (effect DataEff GetData x) (pure true))",
            "(fmap negb (effect DataEff GetData y))",
            "(liftA2 flip.andb (pure false) (pure true))",
            "(bind (effect DataEff GetData z) (k (false (pure 0)) (true (pure 7))))",
            "(kplus (plus (pure tt) (pure tt)))",
        ] {
            let t = r.parse_term(text).unwrap();
            assert_eq!(t.to_string(), text);
        }
    }

    #[test]
    fn wildcard_branch_fills_the_carrier() {
        let t = registry()
            .parse_term("(bind (effect DataEff GetData z) (k (true (pure 7)) (_ (pure 0))))")
            .unwrap();
        assert_eq!(t.to_string(), "(bind (effect DataEff GetData z) (k (false (pure 0)) (true (pure 7))))");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            parse_all("(pure true"),
            Err(ParseError::Syntax {
                pos: 0,
                msg: "unclosed '('".into()
            })
        );
        assert!(matches!(parse_all("a )"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(
            registry().parse_term("(liftA2 nope (pure true) (pure true))"),
            Err(ParseError::Unknown { .. })
        ));
    }

    #[test]
    fn term_files_declare_their_effects() {
        let t = parse_term_file("(vars t u)\n(effect Coin (flip bool))\n(liftA2 andb (effect DataEff GetData t) (effect Coin flip))").unwrap();
        assert_eq!(t.to_string(), "(liftA2 andb (effect DataEff GetData t) (effect Coin flip))");
        assert!(parse_term_file("(vars t)\n(effect DataEff GetData u)").is_err());
        assert!(parse_term_file("").is_err());
        assert!(parse_term_file("(bogus)\n(pure true)").is_err());
    }
}
