//! Query answers shared by every engine.

use std::fmt;

use crate::interval::Interval;
use crate::syntax::Term;

/// One solution: bindings for the goal's variables (in first-occurrence
/// order) and the derivation's degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub bindings: Vec<(String, Term)>,
    pub degree: Interval,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bindings.is_empty() {
            write!(f, "true with {}", self.degree)
        } else {
            for (i, (name, term)) in self.bindings.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{name}={term}")?;
            }
            write!(f, " with {}", self.degree)
        }
    }
}

/// A lazy answer stream. `incomplete` reports whether search was cut off
/// (by a depth limit or a truncated term universe) before it could prove
/// the stream exhaustive; `failure` reports an internal error that ended
/// the stream early (only the compiled-code engine can produce one).
pub trait AnswerSource: Iterator<Item = Answer> {
    fn incomplete(&self) -> bool {
        false
    }

    fn failure(&self) -> Option<String> {
        None
    }
}

/// Renames residual unbound variables to `_0`, `_1`, ... in order of first
/// appearance, so structurally equal answers from different engines render
/// identically. Keys are engine-internal variable identities.
#[derive(Debug, Default)]
pub(crate) struct Canonicalizer {
    names: Vec<(String, String)>,
}

impl Canonicalizer {
    pub(crate) fn new() -> Self {
        Canonicalizer { names: Vec::new() }
    }

    pub(crate) fn name_for(&mut self, key: &str) -> String {
        if let Some((_, fresh)) = self.names.iter().find(|(k, _)| k == key) {
            return fresh.clone();
        }
        let fresh = format!("_{}", self.names.len());
        self.names.push((key.to_string(), fresh.clone()));
        fresh
    }
}
