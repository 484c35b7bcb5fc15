//! Text input and output: the expression grammar, problem files, and the
//! plain, LaTeX and structured (JSON) renderings.

mod lexer;
mod parser;
mod printer;
mod problem;
mod structured;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{ContextError, ExprError};

pub use parser::{parse_expr, parse_rational};
pub use printer::{latex, plain, print_expr, print_form, print_source, render_multi_index};
pub use problem::{parse_problem, NumericSettings, ProblemFile};
pub use structured::{
    expr_from_json, expr_to_json, form_from_json, form_to_json, source_from_json, source_to_json,
    StructuredError,
};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lexical(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("malformed derivative suffix: {0}")]
    MalformedSuffix(String),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("{0}")]
    Invalid(String),
}

/// Output format shared by the printers and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Plain,
    Latex,
    Structured,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Format::Plain),
            "latex" => Ok(Format::Latex),
            "structured" => Ok(Format::Structured),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}
