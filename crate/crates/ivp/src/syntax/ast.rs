//! Abstract syntax for annotated programs and goals.

use std::collections::BTreeSet;

use crate::interval::Interval;

/// First-order terms. Numbers are constants; their text is the name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Append variable names in first-occurrence order, skipping duplicates.
    pub fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(name) => {
                if !out.iter().any(|v| v == name) {
                    out.push(name.clone());
                }
            }
            Term::Const(_) => {}
            Term::Compound(_, args) => {
                for arg in args {
                    arg.collect_variables(out);
                }
            }
        }
    }

    /// Nesting depth: constants and variables are 0, `f(t)` is one more
    /// than its deepest argument.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

/// A predicate applied to terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_variables(&self, out: &mut Vec<String>) {
        for arg in &self.args {
            arg.collect_variables(out);
        }
    }
}

/// A fact or rule. Facts have an empty body. The annotation defaults to
/// `[1,1]` when the source elides it. `body_guards` runs parallel to
/// `body`: a guard is a threshold the subgoal's own computed degree must
/// dominate for the clause to apply.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub annotation: Interval,
    pub body_guards: Vec<Option<Interval>>,
}

impl Clause {
    pub fn fact(head: Atom, annotation: Interval) -> Self {
        Clause {
            head,
            body: Vec::new(),
            annotation,
            body_guards: Vec::new(),
        }
    }

    pub fn rule(head: Atom, body: Vec<Atom>, annotation: Interval) -> Self {
        let guards = vec![None; body.len()];
        Clause {
            head,
            body,
            annotation,
            body_guards: guards,
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// All clause variables in first-occurrence order (head first).
    pub fn variables(&self) -> Vec<String> {
        let mut vars = Vec::new();
        self.head.collect_variables(&mut vars);
        for atom in &self.body {
            atom.collect_variables(&mut vars);
        }
        vars
    }
}

/// A symmetric proximity statement between two distinct symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityEquation {
    pub left: String,
    pub right: String,
    pub degree: Interval,
}

/// A parsed program: clauses and proximity equations in source order plus
/// the lambda-cut threshold (defaults to `[0,0]`, i.e. no pruning).
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub proximities: Vec<ProximityEquation>,
    pub lambda_cut: Interval,
}

impl Program {
    pub fn new() -> Self {
        Program {
            clauses: Vec::new(),
            proximities: Vec::new(),
            lambda_cut: Interval::BOTTOM,
        }
    }
}

impl Default for Program {
    fn default() -> Self {
        Program::new()
    }
}

/// A conjunctive query.
#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    pub atoms: Vec<Atom>,
}

impl Goal {
    /// Goal variables in first-occurrence order, anonymous ones excluded.
    pub fn variables(&self) -> Vec<String> {
        let mut vars = Vec::new();
        for atom in &self.atoms {
            atom.collect_variables(&mut vars);
        }
        vars.retain(|v| !is_anonymous(v));
        vars
    }
}

/// True for parser-generated anonymous variable names.
pub(crate) fn is_anonymous(name: &str) -> bool {
    name.starts_with("_#")
}

/// The symbols occurring in a program, split by kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Alphabet {
    pub constants: BTreeSet<String>,
    pub functions: BTreeSet<(String, usize)>,
    pub predicates: BTreeSet<(String, usize)>,
    pub variables: BTreeSet<String>,
}

/// Extract the program's alphabet. A program without constants gets the
/// artificial constant `a` so its term universe is never empty.
pub fn alphabet(program: &Program) -> Alphabet {
    let mut out = Alphabet::default();
    for clause in &program.clauses {
        scan_atom(&clause.head, &mut out);
        for atom in &clause.body {
            scan_atom(atom, &mut out);
        }
    }
    if out.constants.is_empty() {
        out.constants.insert("a".to_string());
    }
    out
}

fn scan_atom(atom: &Atom, out: &mut Alphabet) {
    out.predicates
        .insert((atom.predicate.clone(), atom.args.len()));
    for arg in &atom.args {
        scan_term(arg, out);
    }
}

fn scan_term(term: &Term, out: &mut Alphabet) {
    match term {
        Term::Var(name) => {
            out.variables.insert(name.clone());
        }
        Term::Const(name) => {
            out.constants.insert(name.clone());
        }
        Term::Compound(functor, args) => {
            out.functions.insert((functor.clone(), args.len()));
            for arg in args {
                scan_term(arg, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(n: &str) -> Term {
        Term::Var(n.into())
    }
    fn con(n: &str) -> Term {
        Term::Const(n.into())
    }

    #[test]
    fn term_depth_counts_nesting() {
        assert_eq!(con("b").depth(), 0);
        assert_eq!(Term::Compound("f".into(), vec![con("b")]).depth(), 1);
        assert_eq!(
            Term::Compound("f".into(), vec![Term::Compound("f".into(), vec![con("b")])]).depth(),
            2
        );
    }

    #[test]
    fn clause_variables_come_in_first_occurrence_order() {
        let clause = Clause::rule(
            Atom::new("p", vec![var("X"), var("Y")]),
            vec![Atom::new("q", vec![var("Y"), var("Z"), var("X")])],
            Interval::TOP,
        );
        assert_eq!(clause.variables(), vec!["X", "Y", "Z"]);
    }

    #[test]
    fn alphabet_collects_each_symbol_kind() {
        let program = Program {
            clauses: vec![
                Clause::fact(
                    Atom::new("q", vec![con("a")]),
                    Interval::new(0.8, 0.9).unwrap(),
                ),
                Clause::rule(
                    Atom::new("p", vec![Term::Compound("f".into(), vec![var("X")])]),
                    vec![Atom::new("q", vec![var("X")])],
                    Interval::TOP,
                ),
            ],
            proximities: Vec::new(),
            lambda_cut: Interval::BOTTOM,
        };
        let a = alphabet(&program);
        assert_eq!(a.constants.iter().collect::<Vec<_>>(), vec!["a"]);
        assert!(a.functions.contains(&("f".to_string(), 1)));
        assert!(a.predicates.contains(&("p".to_string(), 1)));
        assert!(a.predicates.contains(&("q".to_string(), 1)));
        assert!(a.variables.contains("X"));
    }

    #[test]
    fn alphabet_injects_a_constant_when_none_occurs() {
        let program = Program {
            clauses: vec![Clause::rule(
                Atom::new("p", vec![var("X")]),
                vec![Atom::new("q", vec![var("X")])],
                Interval::TOP,
            )],
            proximities: Vec::new(),
            lambda_cut: Interval::BOTTOM,
        };
        let a = alphabet(&program);
        assert_eq!(a.constants.iter().collect::<Vec<_>>(), vec!["a"]);
    }
}
