//! The typed first-order front end: syntax, parsing, printing, sort checking
//! and the interpretation of terms and formulas in a presheaf topos.

mod corpus;
mod interp;
mod parse;
mod print;
mod syntax;
mod typeck;

use thiserror::Error;

pub use corpus::{exhaustive_corpus, random_formula, CorpusLimits};
pub use interp::{
    context_object, interpret_formula, interpret_term, tuple_object, ContextObject,
    SemanticEnvironment,
};
pub use parse::{line_col, parse, parse_term};
pub use print::print;
pub use syntax::{Formula, FormulaKind, Span, Term, TermKind};
pub use typeck::{typecheck, typecheck_term, Context, FunctionSig, Signature, TypedFormula, TypedTerm};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LangError {
    #[error("syntax error at {line}:{column}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        line: usize,
        column: usize,
        span: Span,
        expected: Vec<String>,
        found: String,
    },
    #[error("unbound variable {name}")]
    UnboundVariable { name: String, span: Span },
    #[error("unknown symbol {name}")]
    UnknownSymbol { name: String, span: Span },
    #[error("unknown sort {name}")]
    UnknownSort { name: String, span: Span },
    #[error("{symbol} expects {expected} arguments, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
        span: Span,
    },
    #[error("expected sort {expected}, found {found}")]
    SortMismatch {
        expected: String,
        found: String,
        span: Span,
    },
    #[error("{kind} {name} is declared twice")]
    DuplicateSymbol { kind: &'static str, name: String },
    #[error("no interpretation bound for {0}")]
    MissingInterpretation(String),
    #[error("interpretation of {symbol} does not fit its declaration: {detail}")]
    InterpretationMismatch { symbol: String, detail: String },
}

impl LangError {
    pub fn span(&self) -> Option<Span> {
        match self {
            LangError::Syntax { span, .. }
            | LangError::UnboundVariable { span, .. }
            | LangError::UnknownSymbol { span, .. }
            | LangError::UnknownSort { span, .. }
            | LangError::ArityMismatch { span, .. }
            | LangError::SortMismatch { span, .. } => Some(*span),
            _ => None,
        }
    }
}
