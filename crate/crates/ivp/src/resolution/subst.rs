//! Variable bindings produced by unification.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::syntax::Term;

/// A triangular substitution: bindings may chain through other variables
/// and are resolved lazily. [`Substitution::apply`] fully resolves a term,
/// which makes the applied form idempotent.
///
/// Bound terms are shared behind [`Rc`] so that snapshotting a substitution
/// per candidate clause — which backtracking search does on every step —
/// costs one pointer bump per binding instead of a deep copy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Substitution {
    bindings: BTreeMap<String, Rc<Term>>,
}

/// A term looked up through a substitution without copying it: either the
/// original reference (non-variable or unbound input) or a shared handle
/// to the term its variable chain ends at.
pub enum Resolved<'a> {
    Input(&'a Term),
    Bound(Rc<Term>),
}

impl Resolved<'_> {
    pub fn term(&self) -> &Term {
        match self {
            Resolved::Input(term) => term,
            Resolved::Bound(rc) => rc,
        }
    }
}

impl Substitution {
    pub fn new() -> Self {
        Substitution {
            bindings: BTreeMap::new(),
        }
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var).map(Rc::as_ref)
    }

    pub fn bind(&mut self, var: String, term: Term) {
        self.bindings.insert(var, Rc::new(term));
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Follow variable bindings until hitting an unbound variable or a
    /// non-variable term, without cloning any term along the way. Does not
    /// descend into compound arguments.
    pub fn resolve<'a>(&self, term: &'a Term) -> Resolved<'a> {
        let Term::Var(name) = term else {
            return Resolved::Input(term);
        };
        let Some(mut current) = self.bindings.get(name).cloned() else {
            return Resolved::Input(term);
        };
        let mut hops = 1usize;
        while let Term::Var(name) = current.as_ref() {
            // A binding chain can only cycle through variables if bindings
            // were created outside unification; refuse to spin forever.
            if hops > self.bindings.len() {
                break;
            }
            match self.bindings.get(name) {
                Some(next) => current = next.clone(),
                None => break,
            }
            hops += 1;
        }
        Resolved::Bound(current)
    }

    /// [`Substitution::resolve`], returning the result by value.
    pub fn walk(&self, term: &Term) -> Term {
        self.resolve(term).term().clone()
    }

    /// Fully resolve a term. Cyclic bindings (possible when the occurs
    /// check is off) leave the looping variable in place instead of
    /// recursing forever.
    pub fn apply(&self, term: &Term) -> Term {
        let mut visiting = Vec::new();
        self.apply_guarded(term, &mut visiting)
    }

    fn apply_guarded(&self, term: &Term, visiting: &mut Vec<String>) -> Term {
        match term {
            Term::Var(name) => {
                if visiting.iter().any(|v| v == name) {
                    return term.clone();
                }
                match self.bindings.get(name) {
                    Some(bound) => {
                        visiting.push(name.clone());
                        let resolved = self.apply_guarded(bound.as_ref(), visiting);
                        visiting.pop();
                        resolved
                    }
                    None => term.clone(),
                }
            }
            Term::Const(_) => term.clone(),
            Term::Compound(functor, args) => {
                let resolved = args
                    .iter()
                    .map(|a| self.apply_guarded(a, visiting))
                    .collect();
                Term::Compound(functor.clone(), resolved)
            }
        }
    }
}
