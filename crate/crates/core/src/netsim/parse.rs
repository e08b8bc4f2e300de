//! Concrete syntax of server programs.
//!
//! ```text
//! prog  := stmts ['.']
//! stmts := stmt [';;' stmts]
//! stmt  := place '::<-' netop | place '::=' expr | x '::++' expr
//!        | IF expr THEN stmts [ELSE stmts] END | FOR y IN xs DO stmts END
//!        | Some grp | Or grp grp | OneOf '(' xs ')' y grp | grp
//! grp   := '(' stmts ')'
//! netop := accept | read aexp | write aexp aexp
//! expr  := aexp ['==' aexp]
//! aexp  := not aexp | n | true | false | READING | WRITING | CLOSED
//!        | '*' x | y '->' f | x | connection aexp aexp | '(' expr ')'
//! ```

use super::{Expr, NetOp, Place, Program, Stmt};
use crate::error::ParseError;

const STATES: [&str; 3] = ["READING", "WRITING", "CLOSED"];
const KEYWORDS: [&str; 20] = [
    "IF", "THEN", "ELSE", "END", "FOR", "IN", "DO", "Some", "Or", "OneOf", "not", "connection", "accept",
    "read", "write", "true", "false", "READING", "WRITING", "CLOSED",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Num(u32),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    const SYMS: [&str; 10] = ["::<-", "::=", "::++", ";;", "->", "==", "*", "(", ")", "."];
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Word(text[start..i].to_string())));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "number too large".into(),
            })?;
            out.push((start, Tok::Num(n)));
            continue;
        }
        for s in SYMS {
            if text[i..].starts_with(s) {
                out.push((i, Tok::Sym(s)));
                i += s.len();
                continue 'outer;
            }
        }
        return Err(ParseError::Syntax {
            pos: i,
            msg: format!("unexpected character {:?}", c as char),
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.is_word(w) {
            self.at += 1;
            Ok(())
        } else {
            self.error(format!("expected `{w}`"))
        }
    }

    fn sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.at += 1;
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.at += 1;
                Ok(w)
            }
            _ => self.error("expected an identifier"),
        }
    }

    fn stmts(&mut self) -> Result<Stmt, ParseError> {
        let first = self.stmt()?;
        if self.is_sym(";;") {
            self.at += 1;
            Ok(Stmt::seq(first, self.stmts()?))
        } else {
            Ok(first)
        }
    }

    fn group(&mut self) -> Result<Stmt, ParseError> {
        self.sym("(")?;
        let s = self.stmts()?;
        self.sym(")")?;
        Ok(s)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.is_word("IF") {
            self.at += 1;
            let c = self.expr()?;
            self.word("THEN")?;
            let t = self.stmts()?;
            let e = if self.is_word("ELSE") {
                self.at += 1;
                Some(Box::new(self.stmts()?))
            } else {
                None
            };
            self.word("END")?;
            return Ok(Stmt::If(c, Box::new(t), e));
        }
        if self.is_word("FOR") {
            self.at += 1;
            let y = self.ident()?;
            self.word("IN")?;
            let xs = self.ident()?;
            self.word("DO")?;
            let body = self.stmts()?;
            self.word("END")?;
            return Ok(Stmt::For(y, xs, Box::new(body)));
        }
        if self.is_word("Some") {
            self.at += 1;
            return Ok(Stmt::Some(Box::new(self.group()?)));
        }
        if self.is_word("Or") {
            self.at += 1;
            let a = self.group()?;
            let b = self.group()?;
            return Ok(Stmt::Or(Box::new(a), Box::new(b)));
        }
        if self.is_word("OneOf") {
            self.at += 1;
            self.sym("(")?;
            let xs = self.ident()?;
            self.sym(")")?;
            let y = self.ident()?;
            return Ok(Stmt::OneOf(xs, y, Box::new(self.group()?)));
        }
        if self.is_sym("(") {
            return self.group();
        }
        let x = self.ident()?;
        let place = if self.is_sym("->") {
            self.at += 1;
            Place::Field(x, self.ident()?)
        } else {
            Place::Var(x)
        };
        match self.peek() {
            Some(Tok::Sym("::<-")) => {
                self.at += 1;
                Ok(Stmt::EffAssign(place, self.netop()?))
            }
            Some(Tok::Sym("::=")) => {
                self.at += 1;
                Ok(Stmt::Assign(place, self.expr()?))
            }
            Some(Tok::Sym("::++")) => match place {
                Place::Var(x) => {
                    self.at += 1;
                    Ok(Stmt::Append(x, self.expr()?))
                }
                Place::Field(..) => self.error("cannot append to a field"),
            },
            _ => self.error("expected `::<-`, `::=` or `::++`"),
        }
    }

    fn netop(&mut self) -> Result<NetOp, ParseError> {
        if self.is_word("accept") {
            self.at += 1;
            Ok(NetOp::Accept)
        } else if self.is_word("read") {
            self.at += 1;
            Ok(NetOp::Read(self.aexpr()?))
        } else if self.is_word("write") {
            self.at += 1;
            let a = self.aexpr()?;
            Ok(NetOp::Write(a, self.aexpr()?))
        } else {
            self.error("expected `accept`, `read` or `write`")
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let a = self.aexpr()?;
        if self.is_sym("==") {
            self.at += 1;
            Ok(Expr::Eq(Box::new(a), Box::new(self.aexpr()?)))
        } else {
            Ok(a)
        }
    }

    fn aexpr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                Ok(Expr::Nat(n))
            }
            Some(Tok::Sym("*")) => {
                self.at += 1;
                Ok(Expr::Deref(self.ident()?))
            }
            Some(Tok::Sym("(")) => {
                self.at += 1;
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Some(Tok::Word(w)) => match w.as_str() {
                "not" => {
                    self.at += 1;
                    Ok(Expr::Not(Box::new(self.aexpr()?)))
                }
                "connection" => {
                    self.at += 1;
                    let id = self.aexpr()?;
                    Ok(Expr::Conn(Box::new(id), Box::new(self.aexpr()?)))
                }
                "true" | "false" => {
                    self.at += 1;
                    Ok(Expr::Bool(w == "true"))
                }
                s if STATES.contains(&s) => {
                    self.at += 1;
                    Ok(Expr::State(w))
                }
                _ => {
                    let x = self.ident()?;
                    if self.is_sym("->") {
                        self.at += 1;
                        Ok(Expr::Field(x, self.ident()?))
                    } else {
                        Ok(Expr::Var(x))
                    }
                }
            },
            _ => self.error("expected an expression"),
        }
    }
}

/// Parses an implementation or specification listing.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
    };
    let body = p.stmts()?;
    let period = p.is_sym(".");
    if period {
        p.at += 1;
    }
    if p.peek().is_some() {
        return p.error("trailing input");
    }
    Ok(Program { body, period })
}

fn aexpr(e: &Expr) -> String {
    match e {
        Expr::Eq(..) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Nat(n) => n.to_string(),
        Expr::Bool(b) => b.to_string(),
        Expr::State(s) | Expr::Var(s) => s.clone(),
        Expr::Deref(x) => format!("*{x}"),
        Expr::Field(y, f) => format!("{y}->{f}"),
        Expr::Eq(a, b) => format!("{} == {}", aexpr(a), aexpr(b)),
        Expr::Not(a) => format!("not {}", aexpr(a)),
        Expr::Conn(a, b) => format!("connection {} {}", aexpr(a), aexpr(b)),
    }
}

fn place(p: &Place) -> String {
    match p {
        Place::Var(x) => x.clone(),
        Place::Field(y, f) => format!("{y}->{f}"),
    }
}

fn netop(op: &NetOp) -> String {
    match op {
        NetOp::Accept => "accept".into(),
        NetOp::Read(a) => format!("read {}", aexpr(a)),
        NetOp::Write(a, b) => format!("write {} {}", aexpr(a), aexpr(b)),
    }
}

fn stmt(s: &Stmt, ind: usize, out: &mut String) {
    let pad = " ".repeat(ind);
    match s {
        Stmt::EffAssign(p, op) => out.push_str(&format!("{} ::<- {}", place(p), netop(op))),
        Stmt::Assign(p, e) => out.push_str(&format!("{} ::= {}", place(p), expr(e))),
        Stmt::Append(x, e) => out.push_str(&format!("{x} ::++ {}", expr(e))),
        Stmt::If(c, t, e) => {
            out.push_str(&format!("IF ({}) THEN\n{pad}  ", expr(c)));
            stmt(t, ind + 2, out);
            if let Some(e) = e {
                out.push_str(&format!("\n{pad}ELSE\n{pad}  "));
                stmt(e, ind + 2, out);
            }
            out.push_str(&format!("\n{pad}END"));
        }
        Stmt::For(y, xs, b) => {
            out.push_str(&format!("FOR {y} IN {xs} DO\n{pad}  "));
            stmt(b, ind + 2, out);
            out.push_str(&format!("\n{pad}END"));
        }
        Stmt::Seq(a, b) => {
            if matches!(**a, Stmt::Seq(..)) {
                out.push('(');
                stmt(a, ind + 1, out);
                out.push(')');
            } else {
                stmt(a, ind, out);
            }
            out.push_str(&format!(" ;;\n{pad}"));
            stmt(b, ind, out);
        }
        Stmt::Some(c) => {
            out.push_str(&format!("Some\n{pad}  ("));
            stmt(c, ind + 3, out);
            out.push(')');
        }
        Stmt::Or(a, b) => {
            out.push_str("Or (");
            stmt(a, ind + 4, out);
            out.push_str(&format!(")\n{pad}   ("));
            stmt(b, ind + 4, out);
            out.push(')');
        }
        Stmt::OneOf(xs, y, c) => {
            out.push_str(&format!("OneOf ({xs}) {y}\n{pad}  ("));
            stmt(c, ind + 3, out);
            out.push(')');
        }
    }
}

/// Prints a program in the syntax read by [`parse_program`].
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    stmt(&p.body, 0, &mut out);
    if p.period {
        out.push('.');
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effectful_assignment() {
        let p = parse_program("newconn ::<- accept").unwrap();
        assert_eq!(p.body, Stmt::EffAssign(Place::Var("newconn".into()), NetOp::Accept));
    }

    #[test]
    fn or_of_groups() {
        let p = parse_program("Or (x ::= 1) (y ::= 2)").unwrap();
        assert!(matches!(p.body, Stmt::Or(..)));
    }

    #[test]
    fn unclosed_if_is_an_error() {
        let err = parse_program("IF (*x == 0) THEN x ::= 1").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 25, .. }), "{err}");
    }

    #[test]
    fn sequencing_nests_right_and_prints_left_nesting_with_parens() {
        let p = parse_program("a ::= 1 ;; b ::= 2 ;; c ::= 0").unwrap();
        let Stmt::Seq(_, rest) = &p.body else { panic!() };
        assert!(matches!(**rest, Stmt::Seq(..)));
        let Stmt::Seq(a, r) = p.body else { panic!() };
        let Stmt::Seq(b, c) = *r else { panic!() };
        let left = Program { body: Stmt::seq(Stmt::seq(*a, *b), *c), period: false };
        assert_eq!(parse_program(&print_program(&left)).unwrap(), left);
    }

    #[test]
    fn expressions() {
        let p = parse_program("x ::= not (*n == 0)").unwrap();
        let Stmt::Assign(_, e) = p.body else { panic!() };
        assert_eq!(
            e,
            Expr::Not(Box::new(Expr::Eq(Box::new(Expr::Deref("n".into())), Box::new(Expr::Nat(0)))))
        );
        assert!(parse_program("x ::= connection *n READING").is_ok());
        assert!(parse_program("y->state ::<- write").is_err());
    }
}
