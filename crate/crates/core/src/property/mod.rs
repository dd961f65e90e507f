//! Dynamic properties: a reified temporal core, an indexed LTL surface that
//! compiles into it, and a three-valued finite-trace checker.

pub mod ast;
mod eval;
mod lexer;
pub mod ltl;
mod parser;
pub(crate) mod scope;

use std::fmt;

use thiserror::Error;

pub use ast::{
    ArgTerm, AtomPattern, CmpOp, Domain, DynProp, NumTerm, Quantifier, StateProp, Term, TimeTerm,
};
pub use eval::{
    check_property, eval_state_prop, Binding, BoundValue, CheckError, CompiledProperty, Outcome,
    Verdict,
};
pub use ltl::{compile_ltl, LtlProp, ModalOp, TimeConstraint};
pub use parser::{parse_ltl, parse_property, parse_ttl};
pub use scope::{scope_of, typecheck, Scope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {pos}: {message}")]
pub struct SyntaxError {
    /// Character offset into the parsed text.
    pub pos: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

/// A parsed property in either dialect.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Property {
    Ttl(DynProp),
    Ltl(LtlProp),
}

impl Property {
    /// The property in the core; LTL formulas are compiled.
    pub fn to_dyn(&self) -> DynProp {
        match self {
            Property::Ttl(p) => p.clone(),
            Property::Ltl(p) => compile_ltl(p),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Ttl(p) => write!(f, "ttl: {p}"),
            Property::Ltl(p) => write!(f, "ltl: {p}"),
        }
    }
}
