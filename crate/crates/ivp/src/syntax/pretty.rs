//! Canonical textual form for every syntax node.
//!
//! Printing then re-parsing any parseable program yields the same tree, so
//! `Display` doubles as a normalizer: `[1,1]` annotations are elided where
//! the grammar defaults them, and anonymous variables print as `_`.

use std::fmt;

use crate::interval::Interval;

use super::ast::{is_anonymous, Atom, Clause, Goal, Program, ProximityEquation, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(name) => {
                if is_anonymous(name) {
                    write!(f, "_")
                } else {
                    write!(f, "{name}")
                }
            }
            Term::Const(name) => write!(f, "{name}"),
            Term::Compound(functor, args) => {
                write!(f, "{functor}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, arg) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{arg}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if self.body.is_empty() {
            if self.annotation != Interval::TOP {
                write!(f, "{}", self.annotation)?;
            }
            return write!(f, ".");
        }
        write!(f, " :- ")?;
        for (i, atom) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{atom}")?;
            if let Some(guard) = self.body_guards.get(i).copied().flatten() {
                write!(f, "{guard}")?;
            }
        }
        // A guarded final atom forces an explicit annotation; otherwise a
        // reparse would read the guard as the clause annotation.
        let last_guarded = self.body_guards.last().copied().flatten().is_some();
        if self.annotation != Interval::TOP || last_guarded {
            write!(f, " {}", self.annotation)?;
        }
        write!(f, ".")
    }
}

impl fmt::Display for ProximityEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}~{}={}.", self.left, self.right, self.degree)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut line = |f: &mut fmt::Formatter<'_>, text: String| -> fmt::Result {
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "{text}")
        };
        if self.lambda_cut != Interval::BOTTOM {
            line(f, format!(":-lambdaCutIVFS({}).", self.lambda_cut))?;
        }
        for eq in &self.proximities {
            line(f, eq.to_string())?;
        }
        for clause in &self.clauses {
            line(f, clause.to_string())?;
        }
        Ok(())
    }
}
