//! Program adverbs: reified functor-class terms with pluggable effects,
//! checkable equational and refinement theories, trace-set semantics, and
//! three case studies (boolean circuits, batched-fetch costs, an event-loop
//! server).

pub mod circuit;
pub mod error;
pub mod fold;
pub mod func;
pub mod haxl;
pub mod netsim;
pub mod report;
pub mod semantics;
pub mod sexpr;
pub mod term;
pub mod theory;
pub mod value;

pub use error::{EmbedError, FoldError, ParseError, SemError, TermError, TypeError};
pub use fold::{AlgCase, Algebra, Folded};
pub use func::{FnBody, FnRef, Func};
pub use term::{Continuation, EffectOp, EffectSig, Node, NodeKind, Term, Vocabulary};
pub use value::{FiniteType, Shape, TypeRef, Value};
