//! Program front end: symbol tables, syntax, parsing, fact-file formats,
//! and rendering relations back to clause text.

mod ast;
mod facts;
mod parser;
mod render;
mod symbols;

pub use ast::{Atom, Clause, FactSet, Program, Term, MAX_CONSTANTS};
pub use facts::{parse_facts, FactFormat, RawFactPairs};
pub use parser::parse_program;
pub use render::render_model;
pub use symbols::{ConstId, ConstantTable, PredId, PredicateKind, PredicateTable};

use std::fmt;

/// Errors from parsing programs or fact files, or merging facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrontError {
    Syntax { line: usize, col: usize, msg: String },
    UnexpectedEof { expected: String },
    Arity { line: usize, col: usize, predicate: String, found: usize },
    NonGroundFact { line: usize, col: usize, variable: String },
    HeadVarNotInBody { line: usize, col: usize, variable: String },
    /// A non-atoms fact format needs the caller to name the predicate.
    BindRequired { format: &'static str },
    RuleInFactInput { line: usize },
    MalformedLine { line: usize, msg: String },
    InvalidConstant { line: usize, token: String },
    ConstantLimit { limit: usize, requested: usize },
}

impl fmt::Display for FrontError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrontError::Syntax { line, col, msg } => {
                write!(f, "syntax error at {line}:{col}: {msg}")
            }
            FrontError::UnexpectedEof { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            FrontError::Arity { line, col, predicate, found } => {
                write!(
                    f,
                    "at {line}:{col}: predicate {predicate} used with arity {found}, expected 2"
                )
            }
            FrontError::NonGroundFact { line, col, variable } => {
                write!(f, "at {line}:{col}: fact contains variable {variable}")
            }
            FrontError::HeadVarNotInBody { line, col, variable } => {
                write!(f, "at {line}:{col}: head variable {variable} does not occur in the body")
            }
            FrontError::BindRequired { format } => {
                write!(f, "{format} input needs a predicate to bind its pairs to")
            }
            FrontError::RuleInFactInput { line } => {
                write!(f, "line {line}: fact input must not contain rules")
            }
            FrontError::MalformedLine { line, msg } => {
                write!(f, "line {line}: {msg}")
            }
            FrontError::InvalidConstant { line, token } => {
                write!(
                    f,
                    "line {line}: '{token}' is not a valid constant \
                     (lowercase-initial identifier or digits)"
                )
            }
            FrontError::ConstantLimit { limit, requested } => {
                write!(f, "constant table limit exceeded: {requested} constants, limit {limit}")
            }
        }
    }
}

impl std::error::Error for FrontError {}
