//! One front door for the three execution engines.
//!
//! * `wam` — compile the program and run the abstract machine (default),
//! * `sld` — interpreted goal-directed resolution,
//! * `fixpoint` — compute the least declarative model and read answers off
//!   it by enumerating ground instances of the goal.
//!
//! All three return the same lazy [`AnswerSource`] stream; the first two
//! produce identical answers in identical order, and the fixpoint engine
//! produces for each distinct ground instance of the goal a single answer
//! carrying the join of all derivation degrees.

use crate::answer::{Answer, AnswerSource};
use crate::interval::{Interval, TNormKind};
use crate::resolution::{solve, ProximityTable, SolveOptions};
use crate::semantics::{herbrand, least_model, SemanticsError, DEFAULT_DEPTH_BOUND};
use crate::syntax::{Atom, Goal, Program, Term};
use crate::wam::{compile, compile_query, Machine, MachineOptions};
use std::str::FromStr;
use thiserror::Error;

/// Which engine executes a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineKind {
    /// Compiled abstract machine.
    #[default]
    Wam,
    /// Interpreted resolution.
    Sld,
    /// Least-model lookup.
    Fixpoint,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineKind::Wam => "wam",
            EngineKind::Sld => "sld",
            EngineKind::Fixpoint => "fixpoint",
        })
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wam" => Ok(EngineKind::Wam),
            "sld" => Ok(EngineKind::Sld),
            "fixpoint" => Ok(EngineKind::Fixpoint),
            other => Err(format!(
                "unknown engine {other:?} (expected wam, sld or fixpoint)"
            )),
        }
    }
}

/// Options shared by every engine.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOptions {
    /// Lambda-cut override; `None` defers to the program's directive.
    pub lambda: Option<Interval>,
    /// Depth limit for the search-based engines.
    pub depth_limit: Option<usize>,
    /// Term-depth bound for the fixpoint engine's ground universe.
    pub depth_bound: usize,
    /// How degrees combine along a derivation.
    pub tnorm: TNormKind,
}

impl Default for QueryOptions {
    fn default() -> QueryOptions {
        QueryOptions {
            lambda: None,
            depth_limit: None,
            depth_bound: DEFAULT_DEPTH_BOUND,
            tnorm: TNormKind::default(),
        }
    }
}

/// Errors preparing a query (only the fixpoint engine can fail upfront;
/// the others report problems through their answer streams).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("goal has {vars} variables over a universe of {universe} terms; {total} ground instances exceed the cap of {cap}")]
    GoalSpaceTooLarge {
        vars: usize,
        universe: usize,
        total: u128,
        cap: usize,
    },
}

/// Most ground instances of a goal the fixpoint engine will enumerate.
const GOAL_SPACE_CAP: usize = 1_000_000;

/// Runs `goal` against `program` on the chosen engine, returning a lazy
/// answer stream.
pub fn run_query(
    program: &Program,
    goal: &Goal,
    kind: EngineKind,
    options: &QueryOptions,
) -> Result<Box<dyn AnswerSource>, EngineError> {
    match kind {
        EngineKind::Sld => {
            let solve_options = SolveOptions {
                lambda: options.lambda,
                occurs_check: false,
                depth_limit: options.depth_limit,
                tnorm: options.tnorm,
            };
            Ok(Box::new(solve(program, goal, solve_options)))
        }
        EngineKind::Wam => {
            let image = compile_query(goal, &compile(program));
            let table = ProximityTable::from_equations(&program.proximities);
            let machine_options = MachineOptions {
                lambda: options.lambda.unwrap_or(program.lambda_cut),
                tnorm: options.tnorm,
                depth_limit: options.depth_limit,
            };
            Ok(Box::new(Machine::new(image, table, machine_options)))
        }
        EngineKind::Fixpoint => Ok(Box::new(fixpoint_answers(program, goal, options)?)),
    }
}

/// Answers read off the least declarative model: each grounding of the
/// goal whose model degree passes the lambda-cut (and exceeds bottom)
/// yields one answer, bindings enumerated lexicographically over the
/// ground universe.
struct FixpointAnswers {
    items: std::vec::IntoIter<Answer>,
    incomplete: bool,
}

impl Iterator for FixpointAnswers {
    type Item = Answer;

    fn next(&mut self) -> Option<Answer> {
        self.items.next()
    }
}

impl AnswerSource for FixpointAnswers {
    fn incomplete(&self) -> bool {
        self.incomplete
    }
}

fn fixpoint_answers(
    program: &Program,
    goal: &Goal,
    options: &QueryOptions,
) -> Result<FixpointAnswers, EngineError> {
    let space = herbrand(program, options.depth_bound)?;
    let (model, _) = least_model(program, &space)?;
    let lambda = options.lambda.unwrap_or(program.lambda_cut);
    // Enumerate every goal variable, anonymous ones included (they range
    // over the universe like any other), but report only the named ones.
    let mut vars: Vec<String> = Vec::new();
    for atom in &goal.atoms {
        atom.collect_variables(&mut vars);
    }
    let reported = goal.variables();

    let universe = &space.universe;
    let total = (universe.len() as u128)
        .checked_pow(vars.len() as u32)
        .unwrap_or(u128::MAX);
    if total > GOAL_SPACE_CAP as u128 {
        return Err(EngineError::GoalSpaceTooLarge {
            vars: vars.len(),
            universe: universe.len(),
            total,
            cap: GOAL_SPACE_CAP,
        });
    }

    let mut items = Vec::new();
    // Odometer over the variables, last variable fastest, so bindings come
    // out in lexicographic order of (first var, second var, ...) indices.
    let mut digits = vec![0usize; vars.len()];
    loop {
        if !vars.is_empty() && universe.is_empty() {
            break;
        }
        let degree = goal
            .atoms
            .iter()
            .map(|atom| model.get(&ground_with(atom, &vars, &digits, universe)))
            .fold(Interval::TOP, |acc, d| options.tnorm.apply(&acc, &d));
        if degree != Interval::BOTTOM && lambda.leq(&degree) {
            let bindings = vars
                .iter()
                .zip(&digits)
                .filter(|(name, _)| reported.contains(name))
                .map(|(name, &i)| (name.clone(), universe[i].clone()))
                .collect();
            items.push(Answer { bindings, degree });
        }
        // Advance the odometer; done when it wraps (or had no digits).
        let mut place = digits.len();
        loop {
            if place == 0 {
                break;
            }
            place -= 1;
            digits[place] += 1;
            if digits[place] < universe.len() {
                break;
            }
            digits[place] = 0;
        }
        if digits.iter().all(|&d| d == 0) {
            break;
        }
    }

    Ok(FixpointAnswers {
        items: items.into_iter(),
        incomplete: space.truncated,
    })
}

/// Instantiates `atom` with the assignment encoded by `digits`.
fn ground_with(atom: &Atom, vars: &[String], digits: &[usize], universe: &[Term]) -> Atom {
    fn subst(term: &Term, vars: &[String], digits: &[usize], universe: &[Term]) -> Term {
        match term {
            Term::Var(name) => match vars.iter().position(|v| v == name) {
                Some(i) => universe[digits[i]].clone(),
                None => term.clone(),
            },
            Term::Const(_) => term.clone(),
            Term::Compound(f, args) => Term::Compound(
                f.clone(),
                args.iter()
                    .map(|a| subst(a, vars, digits, universe))
                    .collect(),
            ),
        }
    }
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|a| subst(a, vars, digits, universe))
            .collect(),
    }
}
