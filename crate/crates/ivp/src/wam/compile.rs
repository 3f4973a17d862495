//! Compiler from programs and goals to abstract-machine code.

use std::collections::VecDeque;

use thiserror::Error;

use crate::interval::Interval;
use crate::resolution::ProximityTable;
use crate::syntax::{Atom, Clause, Goal, Program, Term};

use super::instr::{CodeImage, Instr, Reg};

/// Compilation failure (strict mode only).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("predicate {predicate}/{arity} is called but never defined")]
    UnresolvedPredicate { predicate: String, arity: usize },
}

/// Compiles a program leniently: calls to undefined predicates simply
/// fail at run time.
pub fn compile(program: &Program) -> CodeImage {
    compile_with(program, false).expect("lenient compilation cannot fail")
}

/// Compiles a program. In strict mode every body call must resolve to a
/// defined predicate, either directly or through a proximity partner of
/// the same arity.
pub fn compile_with(program: &Program, strict: bool) -> Result<CodeImage, CompileError> {
    let mut groups: Vec<((String, usize), Vec<&Clause>)> = Vec::new();
    for clause in &program.clauses {
        let key = (clause.head.predicate.clone(), clause.head.arity());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, group)) => group.push(clause),
            None => groups.push((key, vec![clause])),
        }
    }
    if strict {
        let table = ProximityTable::from_equations(&program.proximities);
        for clause in &program.clauses {
            for atom in &clause.body {
                let resolved = groups.iter().any(|((name, n), _)| {
                    *n == atom.arity()
                        && (name == &atom.predicate
                            || table.degree_between(&atom.predicate, name).is_some())
                });
                if !resolved {
                    return Err(CompileError::UnresolvedPredicate {
                        predicate: atom.predicate.clone(),
                        arity: atom.arity(),
                    });
                }
            }
        }
    }

    let mut code = Vec::new();
    let mut blocks = Vec::new();
    for ((name, arity), clauses) in groups {
        blocks.push(((name, arity), code.len()));
        let compiled: Vec<Vec<Instr>> = clauses.iter().map(|c| compile_clause(c)).collect();
        if compiled.len() == 1 {
            code.push(Instr::TrustMe {
                degree: clauses[0].annotation,
            });
            code.extend(compiled.into_iter().next().unwrap());
        } else {
            let mut starts = Vec::with_capacity(compiled.len());
            let mut at = code.len();
            for body in &compiled {
                starts.push(at);
                at += 1 + body.len();
            }
            let last = compiled.len() - 1;
            for (i, body) in compiled.into_iter().enumerate() {
                let degree = clauses[i].annotation;
                code.push(if i == 0 {
                    Instr::TryMeElse {
                        alt: starts[1],
                        degree,
                    }
                } else if i < last {
                    Instr::RetryMeElse {
                        alt: starts[i + 1],
                        degree,
                    }
                } else {
                    Instr::TrustMe { degree }
                });
                code.extend(body);
            }
        }
    }
    Ok(CodeImage {
        code,
        blocks,
        query_entry: None,
    })
}

/// Appends a query block for the goal, replacing any previous one. The
/// query block is always the image's final block.
pub fn compile_query(goal: &Goal, image: &CodeImage) -> CodeImage {
    let mut out = image.clone();
    if let Some(entry) = out.query_entry {
        out.code.truncate(entry);
    }
    let entry = out.code.len();
    out.code.push(Instr::TrustMe {
        degree: Interval::TOP,
    });
    let mut vars = Vec::new();
    for atom in &goal.atoms {
        atom.collect_variables(&mut vars);
    }
    let mut ctx = ClauseCtx::new(VarBank::Query);
    for (k, name) in vars.iter().enumerate() {
        out.code.push(Instr::CreateVariable {
            reg: Reg::Q(k),
            name: name.clone(),
        });
        ctx.seen.push((name.clone(), Reg::Q(k)));
    }
    for atom in &goal.atoms {
        ctx.reset_temps();
        ctx.compile_call(atom);
    }
    out.code.append(&mut ctx.code);
    out.code.push(Instr::Halt);
    out.query_entry = Some(entry);
    out
}

/// Everything after the clause's chain instruction.
fn compile_clause(clause: &Clause) -> Vec<Instr> {
    if clause.body.is_empty() {
        let mut ctx = ClauseCtx::new(VarBank::Temporary);
        ctx.compile_head(&clause.head);
        ctx.code.push(Instr::Proceed);
        ctx.code
    } else {
        let mut ctx = ClauseCtx::new(VarBank::Permanent);
        ctx.code.push(Instr::Allocate);
        ctx.compile_head(&clause.head);
        for (atom, guard) in clause.body.iter().zip(&clause.body_guards) {
            ctx.reset_temps();
            if let Some(guard) = guard {
                ctx.code.push(Instr::GuardEnter { guard: *guard });
            }
            ctx.compile_call(atom);
            if guard.is_some() {
                ctx.code.push(Instr::GuardExit);
            }
        }
        ctx.code.push(Instr::Deallocate);
        ctx.code.push(Instr::Proceed);
        ctx.code
    }
}

/// Which register bank a clause's variables live in: facts keep them in
/// temporaries, rules in the environment frame, queries in pre-created
/// query registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarBank {
    Temporary,
    Permanent,
    Query,
}

struct ClauseCtx {
    code: Vec<Instr>,
    seen: Vec<(String, Reg)>,
    bank: VarBank,
    next_x: usize,
    next_y: usize,
}

impl ClauseCtx {
    fn new(bank: VarBank) -> Self {
        ClauseCtx {
            code: Vec::new(),
            seen: Vec::new(),
            bank,
            next_x: 0,
            next_y: 0,
        }
    }

    /// Temporaries are dead across calls, so each call's argument setup
    /// may reuse them. Fact variables live in the same bank and must
    /// persist, so facts never reset.
    fn reset_temps(&mut self) {
        if self.bank != VarBank::Temporary {
            self.next_x = 0;
        }
    }

    fn fresh_temp(&mut self) -> Reg {
        let reg = Reg::X(self.next_x);
        self.next_x += 1;
        reg
    }

    /// The register assigned to a variable, allocating on first sight.
    /// Query variables are pre-seeded and never count as first sight.
    fn var_reg(&mut self, name: &str) -> (Reg, bool) {
        if let Some((_, reg)) = self.seen.iter().find(|(n, _)| n == name) {
            return (*reg, false);
        }
        let reg = match self.bank {
            VarBank::Temporary => self.fresh_temp(),
            VarBank::Permanent => {
                let reg = Reg::Y(self.next_y);
                self.next_y += 1;
                reg
            }
            VarBank::Query => unreachable!("query variables are pre-created"),
        };
        self.seen.push((name.to_string(), reg));
        (reg, true)
    }

    /// Head argument matching: one get per argument, sub-structures
    /// flattened breadth-first through fresh temporaries.
    fn compile_head(&mut self, head: &Atom) {
        let mut queue: VecDeque<(Reg, &Term)> = VecDeque::new();
        for (i, term) in head.args.iter().enumerate() {
            let arg = Reg::A(i);
            match term {
                Term::Var(name) => {
                    let (reg, first) = self.var_reg(name);
                    self.code.push(if first {
                        Instr::GetVariable { reg, arg }
                    } else {
                        Instr::GetValue { reg, arg }
                    });
                }
                Term::Const(name) => self.code.push(Instr::GetConstant {
                    name: name.clone(),
                    arg,
                }),
                Term::Compound(functor, args) => {
                    self.code.push(Instr::GetStructure {
                        functor: functor.clone(),
                        arity: args.len(),
                        arg,
                    });
                    self.match_children(args, &mut queue);
                }
            }
        }
        while let Some((reg, term)) = queue.pop_front() {
            match term {
                Term::Const(name) => self.code.push(Instr::GetConstant {
                    name: name.clone(),
                    arg: reg,
                }),
                Term::Compound(functor, args) => {
                    self.code.push(Instr::GetStructure {
                        functor: functor.clone(),
                        arity: args.len(),
                        arg: reg,
                    });
                    self.match_children(args, &mut queue);
                }
                Term::Var(_) => unreachable!("variables are matched in place"),
            }
        }
    }

    fn match_children<'t>(&mut self, args: &'t [Term], queue: &mut VecDeque<(Reg, &'t Term)>) {
        for child in args {
            match child {
                Term::Var(name) => {
                    let (reg, first) = self.var_reg(name);
                    self.code.push(if first {
                        Instr::UnifyVariable { reg }
                    } else {
                        Instr::UnifyValue { reg }
                    });
                }
                _ => {
                    let temp = self.fresh_temp();
                    self.code.push(Instr::UnifyVariable { reg: temp });
                    queue.push_back((temp, child));
                }
            }
        }
    }

    /// Argument setup and call for one body or query atom.
    fn compile_call(&mut self, atom: &Atom) {
        for (j, term) in atom.args.iter().enumerate() {
            let arg = Reg::A(j);
            match term {
                Term::Var(name) => {
                    let (reg, first) = self.var_reg(name);
                    self.code.push(if first {
                        Instr::PutVariable { reg, arg }
                    } else {
                        Instr::PutValue { reg, arg }
                    });
                }
                Term::Const(name) => self.code.push(Instr::PutConstant {
                    name: name.clone(),
                    arg,
                }),
                Term::Compound(..) => self.build_structure(term, arg),
            }
        }
        self.code.push(Instr::Call {
            predicate: atom.predicate.clone(),
            arity: atom.arity(),
        });
    }

    /// Builds a compound term bottom-up: non-variable children go into
    /// fresh temporaries first, then the structure cell is written with
    /// one unify instruction per child.
    fn build_structure(&mut self, term: &Term, target: Reg) {
        let Term::Compound(functor, args) = term else {
            unreachable!("build_structure is only called on compounds");
        };
        let mut child_regs: Vec<Option<Reg>> = Vec::with_capacity(args.len());
        for child in args {
            match child {
                Term::Var(_) => child_regs.push(None),
                Term::Const(name) => {
                    let temp = self.fresh_temp();
                    self.code.push(Instr::PutConstant {
                        name: name.clone(),
                        arg: temp,
                    });
                    child_regs.push(Some(temp));
                }
                Term::Compound(..) => {
                    let temp = self.fresh_temp();
                    self.build_structure(child, temp);
                    child_regs.push(Some(temp));
                }
            }
        }
        self.code.push(Instr::PutStructure {
            functor: functor.clone(),
            arity: args.len(),
            arg: target,
        });
        for (child, built) in args.iter().zip(child_regs) {
            match child {
                Term::Var(name) => {
                    let (reg, first) = self.var_reg(name);
                    self.code.push(if first {
                        Instr::UnifyVariable { reg }
                    } else {
                        Instr::UnifyValue { reg }
                    });
                }
                _ => self.code.push(Instr::UnifyValue {
                    reg: built.expect("non-variable children are pre-built"),
                }),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_goal, parse_program};

    const GOOD_PLAYER: &str = "good_player(X) :- tall(X), fast(X), coordinate(X).
tall(a)[0.8,0.9].
fast(a)[0.9,1.0].
coordinate(a)[0.2,0.4].";

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn image_for(text: &str) -> CodeImage {
        compile(&parse_program(text).unwrap().program)
    }

    fn image_with_query(text: &str, goal: &str) -> CodeImage {
        compile_query(&parse_goal(goal).unwrap(), &image_for(text))
    }

    #[test]
    fn the_four_clause_program_compiles_to_twenty_five_instructions() {
        let image = image_with_query(GOOD_PLAYER, "good_player(X)");
        assert_eq!(image.code.len(), 25);
        assert_eq!(
            image.blocks,
            vec![
                (("good_player".to_string(), 1), 0),
                (("tall".to_string(), 1), 11),
                (("fast".to_string(), 1), 14),
                (("coordinate".to_string(), 1), 17),
            ]
        );
        assert_eq!(image.query_entry, Some(20));
    }

    #[test]
    fn the_rule_block_frames_its_body_calls_with_an_environment() {
        let image = image_for(GOOD_PLAYER);
        assert_eq!(
            &image.code[0..11],
            &[
                Instr::TrustMe {
                    degree: Interval::TOP
                },
                Instr::Allocate,
                Instr::GetVariable {
                    reg: Reg::Y(0),
                    arg: Reg::A(0)
                },
                Instr::PutValue {
                    reg: Reg::Y(0),
                    arg: Reg::A(0)
                },
                Instr::Call {
                    predicate: "tall".into(),
                    arity: 1
                },
                Instr::PutValue {
                    reg: Reg::Y(0),
                    arg: Reg::A(0)
                },
                Instr::Call {
                    predicate: "fast".into(),
                    arity: 1
                },
                Instr::PutValue {
                    reg: Reg::Y(0),
                    arg: Reg::A(0)
                },
                Instr::Call {
                    predicate: "coordinate".into(),
                    arity: 1
                },
                Instr::Deallocate,
                Instr::Proceed,
            ]
        );
    }

    #[test]
    fn a_ground_fact_compiles_to_trust_get_proceed() {
        let image = image_for(GOOD_PLAYER);
        let at = image.block_address("coordinate", 1).unwrap();
        assert_eq!(
            &image.code[at..at + 3],
            &[
                Instr::TrustMe {
                    degree: iv(0.2, 0.4)
                },
                Instr::GetConstant {
                    name: "a".into(),
                    arg: Reg::A(0)
                },
                Instr::Proceed,
            ]
        );
    }

    #[test]
    fn multi_clause_predicates_chain_their_alternatives() {
        let image = image_for("p(X) :- q(X). q(a)[0.8,0.9]. q(b)[0.7,0.8].");
        let at = image.block_address("q", 1).unwrap();
        assert_eq!(
            image.code[at],
            Instr::TryMeElse {
                alt: at + 3,
                degree: iv(0.8, 0.9)
            }
        );
        assert_eq!(
            image.code[at + 3],
            Instr::TrustMe {
                degree: iv(0.7, 0.8)
            }
        );
    }

    #[test]
    fn three_clause_chains_use_retry_in_the_middle() {
        let image = image_for("r(a)[0.1,0.2]. r(b)[0.3,0.4]. r(c)[0.5,0.6].");
        assert_eq!(
            image.code[0],
            Instr::TryMeElse {
                alt: 3,
                degree: iv(0.1, 0.2)
            }
        );
        assert_eq!(
            image.code[3],
            Instr::RetryMeElse {
                alt: 6,
                degree: iv(0.3, 0.4)
            }
        );
        assert_eq!(
            image.code[6],
            Instr::TrustMe {
                degree: iv(0.5, 0.6)
            }
        );
    }

    #[test]
    fn the_query_block_creates_variables_then_calls() {
        let image = image_with_query(GOOD_PLAYER, "good_player(X)");
        let entry = image.query_entry.unwrap();
        assert_eq!(
            &image.code[entry..],
            &[
                Instr::TrustMe {
                    degree: Interval::TOP
                },
                Instr::CreateVariable {
                    reg: Reg::Q(0),
                    name: "X".into()
                },
                Instr::PutValue {
                    reg: Reg::Q(0),
                    arg: Reg::A(0)
                },
                Instr::Call {
                    predicate: "good_player".into(),
                    arity: 1
                },
                Instr::Halt,
            ]
        );
    }

    #[test]
    fn ground_query_arguments_are_put_as_constants() {
        let image = image_with_query("p(a).", "p(a)");
        let entry = image.query_entry.unwrap();
        assert_eq!(
            &image.code[entry..],
            &[
                Instr::TrustMe {
                    degree: Interval::TOP
                },
                Instr::PutConstant {
                    name: "a".into(),
                    arg: Reg::A(0)
                },
                Instr::Call {
                    predicate: "p".into(),
                    arity: 1
                },
                Instr::Halt,
            ]
        );
    }

    #[test]
    fn recompiling_a_query_replaces_the_previous_block() {
        let base = image_for(GOOD_PLAYER);
        let first = compile_query(&parse_goal("good_player(X)").unwrap(), &base);
        let second = compile_query(&parse_goal("tall(a)").unwrap(), &first);
        assert_eq!(second.query_entry, Some(20));
        assert_eq!(
            second.code[22],
            Instr::Call {
                predicate: "tall".into(),
                arity: 1
            }
        );
        let third = compile_query(&parse_goal("good_player(X)").unwrap(), &second);
        assert_eq!(third, first);
    }

    #[test]
    fn compound_head_arguments_flatten_through_temporaries() {
        let image = image_for("t(f(b)).");
        assert_eq!(
            image.code,
            vec![
                Instr::TrustMe {
                    degree: Interval::TOP
                },
                Instr::GetStructure {
                    functor: "f".into(),
                    arity: 1,
                    arg: Reg::A(0)
                },
                Instr::UnifyVariable { reg: Reg::X(0) },
                Instr::GetConstant {
                    name: "b".into(),
                    arg: Reg::X(0)
                },
                Instr::Proceed,
            ]
        );
    }

    #[test]
    fn nested_head_structures_queue_breadth_first() {
        let image = image_for("t(g(f(b),c)).");
        assert_eq!(
            image.code,
            vec![
                Instr::TrustMe {
                    degree: Interval::TOP
                },
                Instr::GetStructure {
                    functor: "g".into(),
                    arity: 2,
                    arg: Reg::A(0)
                },
                Instr::UnifyVariable { reg: Reg::X(0) },
                Instr::UnifyVariable { reg: Reg::X(1) },
                Instr::GetStructure {
                    functor: "f".into(),
                    arity: 1,
                    arg: Reg::X(0)
                },
                Instr::UnifyVariable { reg: Reg::X(2) },
                Instr::GetConstant {
                    name: "c".into(),
                    arg: Reg::X(1)
                },
                Instr::GetConstant {
                    name: "b".into(),
                    arg: Reg::X(2)
                },
                Instr::Proceed,
            ]
        );
    }

    #[test]
    fn body_structures_are_built_bottom_up() {
        let image = image_for("p(X) :- r(f(X), X).");
        assert_eq!(
            image.code,
            vec![
                Instr::TrustMe {
                    degree: Interval::TOP
                },
                Instr::Allocate,
                Instr::GetVariable {
                    reg: Reg::Y(0),
                    arg: Reg::A(0)
                },
                Instr::PutStructure {
                    functor: "f".into(),
                    arity: 1,
                    arg: Reg::A(0)
                },
                Instr::UnifyValue { reg: Reg::Y(0) },
                Instr::PutValue {
                    reg: Reg::Y(0),
                    arg: Reg::A(1)
                },
                Instr::Call {
                    predicate: "r".into(),
                    arity: 2
                },
                Instr::Deallocate,
                Instr::Proceed,
            ]
        );
    }

    #[test]
    fn guarded_body_calls_are_bracketed() {
        let image = image_for("s(X) :- q(X)[0.5,0.8][1,1].\nq(a)[0.8,0.9].");
        let code = &image.code;
        let enter = code
            .iter()
            .position(|i| matches!(i, Instr::GuardEnter { .. }))
            .unwrap();
        assert_eq!(
            code[enter],
            Instr::GuardEnter {
                guard: iv(0.5, 0.8)
            }
        );
        assert_eq!(
            code[enter + 1..enter + 4],
            [
                Instr::PutValue {
                    reg: Reg::Y(0),
                    arg: Reg::A(0)
                },
                Instr::Call {
                    predicate: "q".into(),
                    arity: 1
                },
                Instr::GuardExit,
            ]
        );
    }

    #[test]
    fn strict_mode_rejects_undefined_body_predicates() {
        let program = parse_program("p(X) :- missing(X).").unwrap().program;
        assert_eq!(
            compile_with(&program, true).unwrap_err(),
            CompileError::UnresolvedPredicate {
                predicate: "missing".into(),
                arity: 1
            }
        );
        assert!(compile_with(&program, false).is_ok());
    }

    #[test]
    fn strict_mode_accepts_calls_resolved_through_proximity() {
        let program = parse_program("p(X) :- almost(X).\ndefined(a).\nalmost~defined=[0.9,1].")
            .unwrap()
            .program;
        assert!(compile_with(&program, true).is_ok());
    }
}
