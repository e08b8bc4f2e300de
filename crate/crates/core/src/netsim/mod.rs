//! The event-loop server: a small imperative language for the
//! implementation, its nondeterministic extension for specifications,
//! their embeddings, and the refinement chain between them.

use std::fmt;

mod embed;
mod parse;
mod verify;

pub use embed::{ServerLang, FAIL_EFF, MEMORY_EFF, NETWORK_EFF};
pub use parse::{parse_program, print_program};
pub use verify::{
    derivations, fixtures, initial_stores, network_model, verify_chain, ChainLink, Fixtures, LinkReport, VerifyError,
    IMPL_LISTING, SPEC_LISTING,
};

/// Network operations; every one returns a natural, 0 meaning failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetOp {
    Accept,
    Read(Expr),
    Write(Expr, Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Nat(u32),
    Bool(bool),
    /// `READING`, `WRITING` or `CLOSED`.
    State(String),
    /// A bare variable name, read from memory.
    Var(String),
    /// `*x`.
    Deref(String),
    /// `y->f`: field `f` of the list element `y` points to.
    Field(String, String),
    Eq(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    /// `connection id state`.
    Conn(Box<Expr>, Box<Expr>),
}

/// Assignment targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Place {
    Var(String),
    Field(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    /// `x ::<- op`
    EffAssign(Place, NetOp),
    /// `x ::= e`
    Assign(Place, Expr),
    /// `x ::++ e`
    Append(String, Expr),
    If(Expr, Box<Stmt>, Option<Box<Stmt>>),
    For(String, String, Box<Stmt>),
    Seq(Box<Stmt>, Box<Stmt>),
    /// One or more repetitions.
    Some(Box<Stmt>),
    /// One or more repetitions of a choice.
    Or(Box<Stmt>, Box<Stmt>),
    /// `OneOf (xs) y c`: repeatedly run `c` with `y` at some element of `xs`.
    OneOf(String, String, Box<Stmt>),
}

impl Stmt {
    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Seq(Box::new(a), Box::new(b))
    }

    /// Whether the statement uses only the implementation language.
    pub fn is_imperative(&self) -> bool {
        match self {
            Stmt::EffAssign(..) | Stmt::Assign(..) | Stmt::Append(..) => true,
            Stmt::If(_, t, e) => t.is_imperative() && e.as_ref().is_none_or(|e| e.is_imperative()),
            Stmt::For(_, _, b) => b.is_imperative(),
            Stmt::Seq(a, b) => a.is_imperative() && b.is_imperative(),
            Stmt::Some(_) | Stmt::Or(..) | Stmt::OneOf(..) => false,
        }
    }
}

/// A parsed listing. Implementation listings end with a period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub body: Stmt,
    pub period: bool,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_program(self))
    }
}
