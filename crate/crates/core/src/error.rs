use std::fmt;

use thiserror::Error;

use crate::model::{Atom, Diagnostic};
use crate::parser::SourceSpan;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Syntax,
    Semantic,
    Resource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    /// An atom used both as a random fact and as a rule head.
    FactAndRuleHead,
    /// Annotations of one disjunctive head add up to more than one.
    ProbabilitySum,
    /// A probability outside `[0, 1]`, duplicate heads, and similar.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}",
            self.span.line, self.span.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("invalid program: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidProgram(Vec<Diagnostic>),
    #[error("program has a cycle through negation involving {0:?}")]
    NegativeCycle(Vec<Atom>),
    #[error("program is not acyclic (cycle involving {0:?})")]
    NotAcyclic(Vec<Atom>),
    #[error("evidence has probability zero")]
    ZeroEvidence,
    #[error("cannot intervene on external atom `{0}`")]
    ExternalIntervention(Atom),
    #[error("atom `{0}` is assigned both true and false")]
    Inconsistent(Atom),
    #[error("atom `{0}` collides with the twin-copy naming scheme")]
    SuffixCollision(Atom),
    #[error("generated atom `{0}` already occurs in the program")]
    FreshAtomCollision(Atom),
    #[error("invalid LPAD clause: {0}")]
    InvalidLpad(String),
    #[error("too many {what} to enumerate ({count}, limit {limit})")]
    TooLarge {
        what: &'static str,
        count: usize,
        limit: usize,
    },
    #[error("time limit exceeded")]
    Timeout,
    #[error("no satisfiable {0} found within the draw budget")]
    Exhausted(&'static str),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(e) if e.kind == ParseErrorKind::Syntax => ErrorClass::Syntax,
            Error::InvalidAtom(_) | Error::Config(_) => ErrorClass::Syntax,
            Error::TooLarge { .. } | Error::Timeout => ErrorClass::Resource,
            _ => ErrorClass::Semantic,
        }
    }
}
