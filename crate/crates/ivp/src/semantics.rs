//! Bottom-up declarative semantics.
//!
//! An interpretation assigns every ground atom a degree interval. Clause
//! valuation follows the usual fuzzy reading: a body is the meet of its
//! atoms, an implication is `[1,1]` when the head already dominates the
//! body and the head's value otherwise, and a clause is the meet over all
//! groundings. The immediate-consequence operator pushes annotated facts
//! and rule conclusions upward; iterating it from the empty interpretation
//! reaches the least model, which the resolution engines are tested
//! against.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::interval::Interval;
use crate::syntax::{alphabet, Atom, Clause, Program, Term};

/// Default nesting depth for the term universe when a program uses
/// function symbols (overridable through `IVP_DEPTH_BOUND` in the CLI).
pub const DEFAULT_DEPTH_BOUND: usize = 3;

/// Hard ceiling on the number of ground atoms we are willing to enumerate.
pub const SPACE_CAP: usize = 1_000_000;

/// Hard ceiling on fixpoint iterations.
pub const ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("ground space too large: {size} atoms exceeds the cap of {cap}")]
    SpaceTooLarge { size: usize, cap: usize },
    #[error("fixpoint did not stabilize within {cap} iterations")]
    IterationCap { cap: usize },
    #[error("cannot intersect an empty set of models")]
    EmptyModelSet,
    #[error("variable {0} has no value in the grounding assignment")]
    UnboundVariable(String),
}

/// The ground terms and atoms a program can talk about. With function
/// symbols the true universe is infinite, so it is cut off at a nesting
/// depth bound and `truncated` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct HerbrandSpace {
    pub universe: Vec<Term>,
    pub base: Vec<Atom>,
    pub truncated: bool,
    pub depth_bound: usize,
}

/// Build the ground universe and base for a program.
pub fn herbrand(program: &Program, depth_bound: usize) -> Result<HerbrandSpace, SemanticsError> {
    let alpha = alphabet(program);
    let mut universe: Vec<Term> = alpha
        .constants
        .iter()
        .map(|c| Term::Const(c.clone()))
        .collect();

    let truncated = !alpha.functions.is_empty();
    if truncated {
        // Grow level by level: each round closes the current universe
        // under every function symbol, up to the depth bound.
        for _ in 0..depth_bound {
            let mut fresh = Vec::new();
            for (functor, arity) in &alpha.functions {
                for args in tuples(&universe, *arity) {
                    let term = Term::Compound(functor.clone(), args);
                    if term.depth() <= depth_bound
                        && !universe.contains(&term)
                        && !fresh.contains(&term)
                    {
                        fresh.push(term);
                    }
                }
                if universe.len() + fresh.len() > SPACE_CAP {
                    return Err(SemanticsError::SpaceTooLarge {
                        size: universe.len() + fresh.len(),
                        cap: SPACE_CAP,
                    });
                }
            }
            if fresh.is_empty() {
                break;
            }
            universe.extend(fresh);
        }
    }
    universe.sort();

    let mut base_size: usize = 0;
    for (_, arity) in &alpha.predicates {
        let combos = universe.len().checked_pow(*arity as u32);
        base_size =
            combos
                .and_then(|c| base_size.checked_add(c))
                .ok_or(SemanticsError::SpaceTooLarge {
                    size: usize::MAX,
                    cap: SPACE_CAP,
                })?;
    }
    if base_size > SPACE_CAP {
        return Err(SemanticsError::SpaceTooLarge {
            size: base_size,
            cap: SPACE_CAP,
        });
    }

    let mut base = Vec::with_capacity(base_size);
    for (predicate, arity) in &alpha.predicates {
        for args in tuples(&universe, *arity) {
            base.push(Atom::new(predicate.clone(), args));
        }
    }
    base.sort();

    Ok(HerbrandSpace {
        universe,
        base,
        truncated,
        depth_bound,
    })
}

/// All `arity`-tuples over `universe`, odometer order.
fn tuples(universe: &[Term], arity: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * universe.len());
        for prefix in &out {
            for term in universe {
                let mut tuple = prefix.clone();
                tuple.push(term.clone());
                next.push(tuple);
            }
        }
        out = next;
    }
    out
}

/// A total map from ground atoms to degrees; atoms not stored are `[0,0]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Interpretation {
    map: BTreeMap<Atom, Interval>,
}

impl Interpretation {
    pub fn new() -> Self {
        Interpretation {
            map: BTreeMap::new(),
        }
    }

    pub fn get(&self, atom: &Atom) -> Interval {
        self.map.get(atom).copied().unwrap_or(Interval::BOTTOM)
    }

    /// Assign a degree; storing bottom just erases the entry so that
    /// structurally equal interpretations compare equal.
    pub fn set(&mut self, atom: Atom, degree: Interval) {
        if degree == Interval::BOTTOM {
            self.map.remove(&atom);
        } else {
            self.map.insert(atom, degree);
        }
    }

    /// Raise an atom's degree to the join with `degree`.
    pub fn join_at(&mut self, atom: Atom, degree: Interval) {
        let joined = self.get(&atom).join(&degree);
        self.set(atom, joined);
    }

    /// Pointwise lattice order over the whole base.
    pub fn pointwise_leq(&self, other: &Interpretation) -> bool {
        self.map
            .iter()
            .all(|(atom, degree)| degree.leq(&other.get(atom)))
    }

    /// Pointwise meet.
    pub fn meet_with(&self, other: &Interpretation) -> Interpretation {
        let mut out = Interpretation::new();
        for (atom, degree) in &self.map {
            out.set(atom.clone(), degree.meet(&other.get(atom)));
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &Interval)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl FromIterator<(Atom, Interval)> for Interpretation {
    fn from_iter<T: IntoIterator<Item = (Atom, Interval)>>(iter: T) -> Self {
        let mut out = Interpretation::new();
        for (atom, degree) in iter {
            out.set(atom, degree);
        }
        out
    }
}

fn apply_assignment(
    term: &Term,
    assignment: &BTreeMap<String, Term>,
) -> Result<Term, SemanticsError> {
    match term {
        Term::Var(name) => assignment
            .get(name)
            .cloned()
            .ok_or_else(|| SemanticsError::UnboundVariable(name.clone())),
        Term::Const(_) => Ok(term.clone()),
        Term::Compound(functor, args) => {
            let grounded = args
                .iter()
                .map(|a| apply_assignment(a, assignment))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::Compound(functor.clone(), grounded))
        }
    }
}

fn ground_atom(atom: &Atom, assignment: &BTreeMap<String, Term>) -> Result<Atom, SemanticsError> {
    let args = atom
        .args
        .iter()
        .map(|a| apply_assignment(a, assignment))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(atom.predicate.clone(), args))
}

/// Value of one clause instance under an interpretation. Facts valuate to
/// the head's degree; implications valuate to `[1,1]` when the head
/// dominates the body and to the head's degree otherwise.
pub fn valuate(
    interp: &Interpretation,
    clause: &Clause,
    assignment: &BTreeMap<String, Term>,
) -> Result<Interval, SemanticsError> {
    let head = ground_atom(&clause.head, assignment)?;
    let head_value = interp.get(&head);
    if clause.body.is_empty() {
        return Ok(head_value);
    }
    let mut body_value = Interval::TOP;
    for atom in &clause.body {
        let ground = ground_atom(atom, assignment)?;
        body_value = body_value.meet(&interp.get(&ground));
    }
    if body_value.leq(&head_value) {
        Ok(Interval::TOP)
    } else {
        Ok(head_value)
    }
}

/// Every grounding assignment of `vars` over `universe`.
fn assignments<'a>(
    vars: &'a [String],
    universe: &'a [Term],
) -> impl Iterator<Item = BTreeMap<String, Term>> + 'a {
    let total: usize = universe.len().pow(vars.len() as u32).max(1);
    let n = universe.len();
    (0..total).map(move |mut index| {
        let mut assignment = BTreeMap::new();
        for var in vars {
            if n > 0 {
                assignment.insert(var.clone(), universe[index % n].clone());
                index /= n;
            }
        }
        assignment
    })
}

fn grounding_count(vars: usize, universe: usize) -> Result<usize, SemanticsError> {
    universe
        .checked_pow(vars as u32)
        .filter(|c| *c <= SPACE_CAP)
        .ok_or(SemanticsError::SpaceTooLarge {
            size: usize::MAX,
            cap: SPACE_CAP,
        })
}

/// Does the interpretation satisfy one clause at threshold `lambda`?
/// Requires the clause's value (the meet over all groundings) to dominate
/// its annotation, and the annotation to dominate `lambda`.
pub fn is_lambda_model_clause(
    interp: &Interpretation,
    clause: &Clause,
    space: &HerbrandSpace,
    lambda: Interval,
) -> Result<bool, SemanticsError> {
    if !lambda.leq(&clause.annotation) {
        return Ok(false);
    }
    let vars = clause.variables();
    grounding_count(vars.len(), space.universe.len())?;
    for assignment in assignments(&vars, &space.universe) {
        let value = valuate(interp, clause, &assignment)?;
        if !clause.annotation.leq(&value) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Does the interpretation satisfy every clause of the program at `lambda`?
pub fn is_lambda_model(
    interp: &Interpretation,
    program: &Program,
    space: &HerbrandSpace,
    lambda: Interval,
) -> Result<bool, SemanticsError> {
    for clause in &program.clauses {
        if !is_lambda_model_clause(interp, clause, space, lambda)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pointwise meet of a non-empty family of models.
pub fn intersect_models(models: &[Interpretation]) -> Result<Interpretation, SemanticsError> {
    let (first, rest) = models.split_first().ok_or(SemanticsError::EmptyModelSet)?;
    let mut out = first.clone();
    for model in rest {
        out = out.meet_with(model);
    }
    Ok(out)
}

/// One application of the immediate-consequence operator: every ground
/// clause instance contributes the meet of its annotation and its body
/// degrees to its head, and contributions to the same atom join.
pub fn step(
    interp: &Interpretation,
    program: &Program,
    space: &HerbrandSpace,
) -> Result<Interpretation, SemanticsError> {
    let mut out = Interpretation::new();
    for clause in &program.clauses {
        let vars = clause.variables();
        grounding_count(vars.len(), space.universe.len())?;
        for assignment in assignments(&vars, &space.universe) {
            let head = ground_atom(&clause.head, &assignment)?;
            let mut contribution = clause.annotation;
            for atom in &clause.body {
                let ground = ground_atom(atom, &assignment)?;
                contribution = contribution.meet(&interp.get(&ground));
            }
            out.join_at(head, contribution);
        }
    }
    Ok(out)
}

/// Iterate [`step`] from the empty interpretation until it stabilizes.
/// Returns the least model and the number of productive iterations (the
/// first repeated interpretation is not counted).
pub fn least_model(
    program: &Program,
    space: &HerbrandSpace,
) -> Result<(Interpretation, usize), SemanticsError> {
    let mut current = Interpretation::new();
    let mut iterations = 0usize;
    loop {
        let next = step(&current, program, space)?;
        if next == current {
            return Ok((current, iterations));
        }
        current = next;
        iterations += 1;
        if iterations > ITERATION_CAP {
            return Err(SemanticsError::IterationCap { cap: ITERATION_CAP });
        }
    }
}

/// Is `atom` entailed at degree `level`? Looks the atom up in the least
/// model computed over the default-depth universe.
pub fn is_logical_consequence(
    program: &Program,
    atom: &Atom,
    level: Interval,
) -> Result<bool, SemanticsError> {
    let space = herbrand(program, DEFAULT_DEPTH_BOUND)?;
    let (model, _) = least_model(program, &space)?;
    Ok(level.leq(&model.get(atom)))
}

/// Render an interpretation over the whole base, one `atom -> [l,u]` line
/// per ground atom, sorted by the atom's text.
pub fn render_model(interp: &Interpretation, space: &HerbrandSpace) -> String {
    let mut lines: Vec<String> = space
        .base
        .iter()
        .map(|atom| format!("{} -> {}", atom, interp.get(atom)))
        .collect();
    lines.sort();
    lines.join("\n")
}
