//! The boolean circuit language: syntax, parser and printer.
//!
//! Grammar (lowest to highest precedence): `|`, `&`, prefix `!`; both infix
//! operators associate to the left. Atoms are `true`, `false`, identifiers
//! and parenthesized circuits.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::error::ParseError;

mod embed;

pub use embed::{
    app_depth, app_num_var, check_properties, embed_deep, embed_freer, embed_reified,
    embed_shallow, random_reified_term, CircuitLang, DATA_EFF, GET_DATA,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Circuit {
    Lit(bool),
    Var(String),
    Neg(Box<Circuit>),
    And(Box<Circuit>, Box<Circuit>),
    Or(Box<Circuit>, Box<Circuit>),
}

impl Circuit {
    pub fn var(x: &str) -> Self {
        Circuit::Var(x.into())
    }

    pub fn neg(c: Circuit) -> Self {
        Circuit::Neg(Box::new(c))
    }

    pub fn and(a: Circuit, b: Circuit) -> Self {
        Circuit::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Circuit, b: Circuit) -> Self {
        Circuit::Or(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Circuit::Lit(_) => {}
            Circuit::Var(x) => {
                out.insert(x.clone());
            }
            Circuit::Neg(a) => a.collect_vars(out),
            Circuit::And(a, b) | Circuit::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Gate depth: literals and variables are 0, every gate adds one level.
    pub fn depth(&self) -> u32 {
        match self {
            Circuit::Lit(_) | Circuit::Var(_) => 0,
            Circuit::Neg(a) => 1 + a.depth(),
            Circuit::And(a, b) | Circuit::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Variable occurrences.
    pub fn num_var(&self) -> u32 {
        match self {
            Circuit::Lit(_) => 0,
            Circuit::Var(_) => 1,
            Circuit::Neg(a) => a.num_var(),
            Circuit::And(a, b) | Circuit::Or(a, b) => a.num_var() + b.num_var(),
        }
    }

    /// A random circuit of depth at most `depth` over `vars` (non-empty).
    pub fn random(rng: &mut impl Rng, vars: &[&str], depth: u32) -> Circuit {
        let leaf = depth == 0 || rng.gen_ratio(1, 4);
        if leaf {
            return if rng.gen_ratio(1, 3) {
                Circuit::Lit(rng.gen())
            } else {
                Circuit::var(vars[rng.gen_range(0..vars.len())])
            };
        }
        match rng.gen_range(0..5) {
            0 => Circuit::neg(Circuit::random(rng, vars, depth - 1)),
            1 | 2 => Circuit::and(Circuit::random(rng, vars, depth - 1), Circuit::random(rng, vars, depth - 1)),
            _ => Circuit::or(Circuit::random(rng, vars, depth - 1), Circuit::random(rng, vars, depth - 1)),
        }
    }
}

// precedence levels used by the printer
const OR: u8 = 0;
const AND: u8 = 1;
const NEG: u8 = 2;

fn write_at(c: &Circuit, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match c {
        Circuit::Or(..) => OR,
        Circuit::And(..) => AND,
        _ => NEG,
    };
    if own < level {
        write!(f, "(")?;
    }
    match c {
        Circuit::Lit(b) => write!(f, "{b}")?,
        Circuit::Var(x) => write!(f, "{x}")?,
        Circuit::Neg(a) => {
            write!(f, "!")?;
            write_at(a, NEG, f)?;
        }
        Circuit::And(a, b) => {
            write_at(a, AND, f)?;
            write!(f, " & ")?;
            write_at(b, NEG, f)?;
        }
        Circuit::Or(a, b) => {
            write_at(a, OR, f)?;
            write!(f, " | ")?;
            write_at(b, AND, f)?;
        }
    }
    if own < level {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, OR, f)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn or(&mut self) -> Result<Circuit, ParseError> {
        let mut acc = self.and()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            acc = Circuit::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Circuit, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            acc = Circuit::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Circuit, ParseError> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(Circuit::neg(self.unary()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let c = self.or()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(c)
            }
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Ok(match word {
                    "true" => Circuit::Lit(true),
                    "false" => Circuit::Lit(false),
                    x => Circuit::var(x),
                })
            }
            Some(_) => Err(self.error("expected a literal, variable, `!` or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses a circuit. Errors carry the byte offset of the problem.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let c = p.or()?;
    if p.peek().is_some() {
        return Err(p.error("trailing input"));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse_circuit("x & true").unwrap(), Circuit::and(Circuit::var("x"), Circuit::Lit(true)));
        assert_eq!(
            parse_circuit("!x | y & z").unwrap(),
            Circuit::or(Circuit::neg(Circuit::var("x")), Circuit::and(Circuit::var("y"), Circuit::var("z")))
        );
        assert_eq!(
            parse_circuit("a & b & c").unwrap(),
            Circuit::and(Circuit::and(Circuit::var("a"), Circuit::var("b")), Circuit::var("c"))
        );
    }

    #[test]
    fn errors_report_position() {
        assert_eq!(parse_circuit("x &"), Err(ParseError::Syntax { pos: 3, msg: "unexpected end of input".into() }));
        assert!(matches!(parse_circuit("(x"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_circuit("x y"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn printer_inserts_needed_parens_only() {
        let c = parse_circuit("a & (b | c) | !(d & e) | (f | g)").unwrap();
        assert_eq!(c.to_string(), "a & (b | c) | !(d & e) | (f | g)");
        assert_eq!(parse_circuit("((x))").unwrap().to_string(), "x");
    }

    #[test]
    fn deep_metrics() {
        let c = Circuit::and(Circuit::var("x"), Circuit::var("x"));
        assert_eq!((c.depth(), c.num_var()), (1, 2));
        assert_eq!(Circuit::neg(Circuit::Lit(true)).depth(), 1);
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        let leaf = prop_oneof![
            any::<bool>().prop_map(Circuit::Lit),
            "[a-e][0-9]?".prop_map(|s| Circuit::Var(s)),
        ];
        leaf.prop_recursive(6, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Circuit::neg),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Circuit::and(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Circuit::or(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_print(c in arb_circuit()) {
            prop_assert_eq!(parse_circuit(&c.to_string()).unwrap(), c);
        }
    }
}
