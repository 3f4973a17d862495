//! Surface syntax: abstract syntax tree, lexer, parser and pretty-printer.
//!
//! Programs are Prolog-like clauses whose facts and rules may carry an
//! interval annotation, plus proximity equations between symbols and an
//! optional lambda-cut directive:
//!
//! ```text
//! q(a)[0.8,0.9].
//! p(X) :- q(X).
//! loves~passion=[0.25,0.8].
//! :-lambdaCutIVFS([0.5,0.5]).
//! ```

mod ast;
mod lexer;
mod parser;
mod pretty;

pub(crate) use ast::is_anonymous;
pub use ast::{alphabet, Alphabet, Atom, Clause, Goal, Program, ProximityEquation, Term};
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse_goal, parse_program, ParseWarning, Parsed};

use crate::interval::IntervalError;
use thiserror::Error;

/// Errors raised while reading program text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: unexpected character {ch:?}")]
    Lex { line: u32, col: u32, ch: char },
    #[error("{line}:{col}: expected {expected}, found {found}")]
    Parse {
        line: u32,
        col: u32,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: {source}")]
    InvalidInterval {
        line: u32,
        col: u32,
        source: IntervalError,
    },
}
