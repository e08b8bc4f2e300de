use thiserror::Error;

use crate::term::NodeKind;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type {0} has an empty carrier")]
    EmptyCarrier(String),
    #[error("type {ty} lists {value} twice")]
    DuplicateCarrierValue { ty: String, value: Value },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("node kind {0} is not in the vocabulary")]
    KindNotInVocabulary(NodeKind),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("effect {0} is already registered with a different signature")]
    DuplicateEffectName(String),
    #[error("effect {sig} has no operation {op}")]
    UnknownOperation { sig: String, op: String },
    #[error("table for {name} is missing {missing:?}")]
    IncompleteTable { name: String, missing: Vec<Value> },
    #[error("continuation is missing an entry for {0}")]
    IncompleteContinuation(Value),
    #[error("function {0} is opaque")]
    OpaqueFunction(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoldError {
    #[error("algebra has no case for {0}")]
    MissingAlgebraCase(NodeKind),
    #[error("cannot fold through opaque continuation {0}")]
    OpaqueContinuation(String),
    #[error("unbound variable {0}")]
    UnboundVar(String),
    #[error("{0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown {what} {name}")]
    Unknown { what: &'static str, name: String },
    #[error("malformed {what}: {text}")]
    Malformed { what: &'static str, text: String },
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("unbound variable {0}")]
    UnboundVar(String),
    #[error("value {value} escapes carrier of {ty}")]
    OutsideCarrier { value: Value, ty: String },
    #[error("function {name} is undefined at {args:?}")]
    UndefinedFunction { name: String, args: Vec<Value> },
    #[error("bad memory access: {0}")]
    Memory(String),
    #[error("unknown effect operation {sig}.{op}")]
    UnknownOperation { sig: String, op: String },
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("variable {0} is not in scope")]
    Scope(String),
    #[error("type error: {0}")]
    Type(String),
    #[error(transparent)]
    Term(#[from] TermError),
}
