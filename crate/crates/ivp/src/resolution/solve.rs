//! Depth-first SLD search with interval degrees, proximity-aware clause
//! selection, guard thresholds, and λ-cut pruning.

use std::collections::VecDeque;

use crate::answer::{Answer, AnswerSource, Canonicalizer};
use crate::interval::{Interval, TNormKind};
use crate::syntax::{Atom, Clause, Goal, Program, Term};

use super::subst::Substitution;
use super::table::ProximityTable;
use super::unify::{weak_unify, UnifyError};

/// Knobs for a resolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Cut threshold. `None` defers to the program's own directive; the
    /// effective threshold prunes any step whose degree is not ≥ it
    /// (incomparable counts as below).
    pub lambda: Option<Interval>,
    /// Occurs check during unification (off by default, Prolog-style).
    pub occurs_check: bool,
    /// Maximum resolution steps along one branch; branches cut here mark
    /// the answer stream incomplete instead of failing the query.
    pub depth_limit: Option<usize>,
    /// How step degrees are combined (meet for `Min`).
    pub tnorm: TNormKind,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            lambda: None,
            occurs_check: false,
            depth_limit: None,
            tnorm: TNormKind::Min,
        }
    }
}

/// Why a single resolution step was rejected. Both variants drive
/// backtracking in the full search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepError {
    /// The selected atom does not (weakly) unify with the clause head.
    Unify(UnifyError),
    /// The step succeeded but its degree fell below the cut threshold.
    LambdaCutPruned,
}

/// One resolution step: unify the leftmost goal atom with the head of
/// `clause`, meet the clause annotation and unification degree into the
/// running degree, and splice the clause body in place of the atom.
///
/// The clause must already be renamed apart from the goal. Panics if the
/// goal is empty.
pub fn resolve_step(
    goal: &[Atom],
    degree: Interval,
    clause: &Clause,
    table: &ProximityTable,
    options: &SolveOptions,
) -> Result<(Vec<Atom>, Substitution, Interval), StepError> {
    let selected = goal
        .first()
        .expect("resolve_step requires a non-empty goal");
    let (subst, unifier_degree) = weak_unify(
        selected,
        &clause.head,
        table,
        &Substitution::new(),
        options.occurs_check,
    )
    .map_err(StepError::Unify)?;
    let contribution = options.tnorm.apply(&clause.annotation, &unifier_degree);
    let new_degree = options.tnorm.apply(&degree, &contribution);
    if let Some(lambda) = options.lambda {
        if !lambda.leq(&new_degree) {
            return Err(StepError::LambdaCutPruned);
        }
    }
    let resolvent = clause
        .body
        .iter()
        .chain(&goal[1..])
        .map(|atom| apply_to_atom(&subst, atom))
        .collect();
    Ok((resolvent, subst, new_degree))
}

/// Runs the goal against the program and returns a lazy answer stream.
///
/// The search is depth-first with leftmost selection. For each call the
/// candidate clauses are: the called predicate's own clauses in textual
/// order, then the clauses of every proximate predicate of the same arity
/// in first-occurrence order (textual within each). Guarded body atoms
/// succeed only when the degree accumulated over their sub-derivation is
/// at least the guard.
pub fn solve(program: &Program, goal: &Goal, options: SolveOptions) -> SldAnswers {
    let table = ProximityTable::from_equations(&program.proximities);
    let lambda = options.lambda.unwrap_or(program.lambda_cut);
    let mut index = ClauseIndex { groups: Vec::new() };
    for clause in &program.clauses {
        let key = (clause.head.predicate.clone(), clause.head.arity());
        match index.groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, group)) => group.push(clause.clone()),
            None => index.groups.push((key, vec![clause.clone()])),
        }
    }
    let items = goal
        .atoms
        .iter()
        .map(|atom| GoalItem::Call {
            atom: atom.clone(),
            guard: None,
        })
        .collect();
    SldAnswers {
        index,
        table,
        options,
        lambda,
        goal_vars: goal.variables(),
        stack: vec![SearchNode {
            items,
            subst: Substitution::new(),
            degree: Interval::TOP,
            accumulators: Vec::new(),
            depth: 0,
        }],
        rename_counter: 0,
        incomplete: false,
    }
}

/// Lazy stream of SLD answers in search order.
#[derive(Debug)]
pub struct SldAnswers {
    index: ClauseIndex,
    table: ProximityTable,
    options: SolveOptions,
    lambda: Interval,
    goal_vars: Vec<String>,
    stack: Vec<SearchNode>,
    rename_counter: usize,
    incomplete: bool,
}

/// Clauses grouped by predicate/arity in first-occurrence order.
#[derive(Debug)]
struct ClauseIndex {
    groups: Vec<((String, usize), Vec<Clause>)>,
}

impl ClauseIndex {
    /// Candidate clauses for a call, in the order search must try them:
    /// the exact predicate's clauses first, then each proximate
    /// predicate's clauses.
    fn candidates(&self, predicate: &str, arity: usize, table: &ProximityTable) -> Vec<&Clause> {
        let mut out = Vec::new();
        for ((name, n), clauses) in &self.groups {
            if *n == arity && name == predicate {
                out.extend(clauses.iter());
            }
        }
        for ((name, n), clauses) in &self.groups {
            if *n == arity && name != predicate && table.degree_between(predicate, name).is_some() {
                out.extend(clauses.iter());
            }
        }
        out
    }
}

/// Work items of one search branch. A guarded call queues a `GuardExit`
/// after the spliced clause body, so the exit is reached exactly when the
/// call's sub-derivation has been fully resolved.
#[derive(Debug, Clone)]
enum GoalItem {
    Call { atom: Atom, guard: Option<Interval> },
    GuardExit { guard: Interval },
}

#[derive(Debug, Clone)]
struct SearchNode {
    items: VecDeque<GoalItem>,
    subst: Substitution,
    degree: Interval,
    /// One running degree per guarded call still being resolved;
    /// every step's contribution is met into all of them.
    accumulators: Vec<Interval>,
    depth: usize,
}

impl Iterator for SldAnswers {
    type Item = Answer;

    fn next(&mut self) -> Option<Answer> {
        while let Some(mut node) = self.stack.pop() {
            let Some(item) = node.items.pop_front() else {
                return Some(self.answer_from(&node));
            };
            match item {
                GoalItem::GuardExit { guard } => {
                    let sub_degree = node
                        .accumulators
                        .pop()
                        .expect("guard exit without a matching accumulator");
                    if guard.leq(&sub_degree) {
                        self.stack.push(node);
                    }
                }
                GoalItem::Call { atom, guard } => {
                    if let Some(limit) = self.options.depth_limit {
                        if node.depth >= limit {
                            self.incomplete = true;
                            continue;
                        }
                    }
                    self.expand(&node, &atom, guard);
                }
            }
        }
        None
    }
}

impl AnswerSource for SldAnswers {
    fn incomplete(&self) -> bool {
        self.incomplete
    }
}

impl SldAnswers {
    /// Pushes one successor node per applicable candidate clause, first
    /// candidate on top so depth-first search tries clauses in order.
    fn expand(&mut self, node: &SearchNode, atom: &Atom, guard: Option<Interval>) {
        let candidates = self
            .index
            .candidates(&atom.predicate, atom.arity(), &self.table);
        let mut successors = Vec::new();
        for clause in candidates {
            let renamed = rename_clause(clause, self.rename_counter);
            self.rename_counter += 1;
            let Ok((subst, unifier_degree)) = weak_unify(
                atom,
                &renamed.head,
                &self.table,
                &node.subst,
                self.options.occurs_check,
            ) else {
                continue;
            };
            let contribution = self
                .options
                .tnorm
                .apply(&renamed.annotation, &unifier_degree);
            let degree = self.options.tnorm.apply(&node.degree, &contribution);
            if !self.lambda.leq(&degree) {
                continue;
            }
            let mut accumulators: Vec<Interval> = node
                .accumulators
                .iter()
                .map(|acc| self.options.tnorm.apply(acc, &contribution))
                .collect();
            let mut items = VecDeque::with_capacity(renamed.body.len() + node.items.len() + 1);
            for (body_atom, body_guard) in renamed.body.iter().zip(&renamed.body_guards) {
                items.push_back(GoalItem::Call {
                    atom: body_atom.clone(),
                    guard: *body_guard,
                });
            }
            if let Some(g) = guard {
                accumulators.push(contribution);
                items.push_back(GoalItem::GuardExit { guard: g });
            }
            items.extend(node.items.iter().cloned());
            successors.push(SearchNode {
                items,
                subst,
                degree,
                accumulators,
                depth: node.depth + 1,
            });
        }
        self.stack.extend(successors.into_iter().rev());
    }

    fn answer_from(&self, node: &SearchNode) -> Answer {
        let mut canon = Canonicalizer::new();
        let bindings = self
            .goal_vars
            .iter()
            .map(|var| {
                let term = node.subst.apply(&Term::Var(var.clone()));
                (var.clone(), canonicalize_term(&term, &mut canon))
            })
            .collect();
        Answer {
            bindings,
            degree: node.degree,
        }
    }
}

fn apply_to_atom(subst: &Substitution, atom: &Atom) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|term| subst.apply(term)).collect(),
    }
}

fn canonicalize_term(term: &Term, canon: &mut Canonicalizer) -> Term {
    match term {
        Term::Var(name) => Term::Var(canon.name_for(name)),
        Term::Const(_) => term.clone(),
        Term::Compound(functor, args) => Term::Compound(
            functor.clone(),
            args.iter()
                .map(|arg| canonicalize_term(arg, canon))
                .collect(),
        ),
    }
}

/// Renames every variable of the clause with a per-step suffix that no
/// source-level identifier can contain, keeping candidates apart from the
/// goal and from each other.
fn rename_clause(clause: &Clause, index: usize) -> Clause {
    Clause {
        head: rename_atom(&clause.head, index),
        body: clause.body.iter().map(|a| rename_atom(a, index)).collect(),
        annotation: clause.annotation,
        body_guards: clause.body_guards.clone(),
    }
}

fn rename_atom(atom: &Atom, index: usize) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|t| rename_term(t, index)).collect(),
    }
}

fn rename_term(term: &Term, index: usize) -> Term {
    match term {
        Term::Var(name) => Term::Var(format!("{name}#{index}")),
        Term::Const(_) => term.clone(),
        Term::Compound(functor, args) => Term::Compound(
            functor.clone(),
            args.iter().map(|t| rename_term(t, index)).collect(),
        ),
    }
}
