//! Shared helpers for the integration suites: a deterministic random
//! program generator plus answer-collection utilities.
//!
//! Generated programs are function-free, guard-free and proximity-free,
//! with acyclic predicate dependencies, so every engine terminates on
//! every goal and the bottom-up least model is a usable reference for the
//! search engines' answers.

use ivp::engine::{run_query, EngineKind, QueryOptions};
use ivp::syntax::{parse_goal, parse_program, Goal, Program};
use ivp::{Answer, Interval};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Predicate names, in dependency order: a rule whose head is at index `i`
/// may only call predicates at strictly larger indices, which rules out
/// recursion.
const PREDICATES: [&str; 4] = ["p", "q", "r", "s"];
const CONSTANTS: [&str; 3] = ["a", "b", "c"];
const VARIABLES: [&str; 3] = ["X", "Y", "Z"];

/// A generated program with its source text and symbol catalog.
pub struct SampleProgram {
    pub source: String,
    pub program: Program,
    /// Every predicate the source may mention, with its fixed arity.
    pub predicates: Vec<(String, usize)>,
    /// The constants that actually occur in the source — the ground
    /// universe. A generated clause can be all-variables, so this may be
    /// a strict subset of the pool (or even empty).
    pub constants: Vec<String>,
}

fn collect_constants(term: &ivp::Term, out: &mut Vec<String>) {
    match term {
        ivp::Term::Var(_) => {}
        ivp::Term::Const(name) => {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
        ivp::Term::Compound(_, args) => {
            for arg in args {
                collect_constants(arg, out);
            }
        }
    }
}

/// One endpoint of the 0.05 annotation grid, printed with two decimals so
/// the source text parses back to the same `f64` everywhere.
fn grid_point(rng: &mut ChaCha8Rng) -> String {
    let k = rng.gen_range(0..=20u32);
    format!("{:.2}", f64::from(k) * 0.05)
}

/// A random `[lo,hi]` annotation on the 0.05 grid, as source text.
pub fn grid_interval_text(rng: &mut ChaCha8Rng) -> String {
    let a = grid_point(rng);
    let b = grid_point(rng);
    let (lo, hi) = if a.parse::<f64>().unwrap() <= b.parse::<f64>().unwrap() {
        (a, b)
    } else {
        (b, a)
    };
    format!("[{lo},{hi}]")
}

/// A random lattice element on the 0.05 grid.
pub fn grid_interval(rng: &mut ChaCha8Rng) -> Interval {
    grid_interval_text(rng).parse().unwrap()
}

fn term_text(rng: &mut ChaCha8Rng, constants: &[String], var_chance: f64) -> String {
    if rng.gen_bool(var_chance) {
        VARIABLES[rng.gen_range(0..VARIABLES.len())].to_string()
    } else {
        constants[rng.gen_range(0..constants.len())].clone()
    }
}

fn atom_text(
    rng: &mut ChaCha8Rng,
    predicates: &[(String, usize)],
    index: usize,
    constants: &[String],
    var_chance: f64,
) -> String {
    let (name, arity) = &predicates[index];
    let args: Vec<String> = (0..*arity)
        .map(|_| term_text(rng, constants, var_chance))
        .collect();
    format!("{}({})", name, args.join(","))
}

/// Generates one random program. Bounds: at most 4 predicates, 3
/// constants and 6 clauses; every clause is a fact or an acyclic rule;
/// annotations sit on the 0.05 grid and are sometimes omitted (defaulting
/// to `[1,1]`).
pub fn random_program(rng: &mut ChaCha8Rng) -> SampleProgram {
    let pred_count = rng.gen_range(1..=PREDICATES.len());
    let predicates: Vec<(String, usize)> = PREDICATES[..pred_count]
        .iter()
        .map(|name| (name.to_string(), rng.gen_range(1..=2usize)))
        .collect();
    let const_count = rng.gen_range(1..=CONSTANTS.len());
    let constants: Vec<String> = CONSTANTS[..const_count]
        .iter()
        .map(|c| c.to_string())
        .collect();

    let clause_count = rng.gen_range(1..=6usize);
    let mut lines = Vec::with_capacity(clause_count);
    for i in 0..clause_count {
        let head = rng.gen_range(0..pred_count);
        // The first clause is always a fact so the universe is inhabited;
        // the last predicate has nothing later to call, so it only gets
        // facts too.
        let make_rule = i > 0 && head + 1 < pred_count && rng.gen_bool(0.4);
        let head_text = atom_text(
            rng,
            &predicates,
            head,
            &constants,
            if make_rule { 0.6 } else { 0.15 },
        );
        let body_text = if make_rule {
            let goals: Vec<String> = (0..rng.gen_range(1..=3usize))
                .map(|_| {
                    let callee = rng.gen_range(head + 1..pred_count);
                    atom_text(rng, &predicates, callee, &constants, 0.5)
                })
                .collect();
            format!(" :- {}", goals.join(", "))
        } else {
            String::new()
        };
        let annotation = if rng.gen_bool(0.85) {
            grid_interval_text(rng)
        } else {
            String::new()
        };
        lines.push(format!("{head_text}{body_text}{annotation}."));
    }

    let source = lines.join("\n") + "\n";
    let program = parse_program(&source)
        .unwrap_or_else(|e| panic!("generated source failed to parse: {e}\n{source}"))
        .program;
    let mut occurring = Vec::new();
    for clause in &program.clauses {
        for atom in std::iter::once(&clause.head).chain(&clause.body) {
            for arg in &atom.args {
                collect_constants(arg, &mut occurring);
            }
        }
    }
    occurring.sort();
    SampleProgram {
        source,
        program,
        predicates,
        constants: occurring,
    }
}

/// Every ground goal over the sample's predicates and constants, one atom
/// per goal, in lexicographic order.
pub fn ground_goals(sample: &SampleProgram) -> Vec<Goal> {
    let mut goals = Vec::new();
    for (name, arity) in &sample.predicates {
        let mut tuples: Vec<Vec<&String>> = vec![Vec::new()];
        for _ in 0..*arity {
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    sample.constants.iter().map(move |c| {
                        let mut next = prefix.clone();
                        next.push(c);
                        next
                    })
                })
                .collect();
        }
        for tuple in tuples {
            let args: Vec<&str> = tuple.iter().map(|c| c.as_str()).collect();
            let text = format!("{}({}).", name, args.join(","));
            goals.push(parse_goal(&text).expect("generated goal parses"));
        }
    }
    goals
}

/// A random (possibly non-ground) single-atom goal over the sample's
/// symbols. Falls back to an all-variables goal when the program happens
/// to mention no constants at all.
pub fn random_goal(rng: &mut ChaCha8Rng, sample: &SampleProgram) -> Goal {
    let index = rng.gen_range(0..sample.predicates.len());
    let var_chance = if sample.constants.is_empty() {
        1.0
    } else {
        0.5
    };
    let mut text = atom_text(
        rng,
        &sample.predicates,
        index,
        &sample.constants,
        var_chance,
    );
    text.push('.');
    parse_goal(&text).expect("generated goal parses")
}

/// Drains an engine's answer stream, panicking on machine faults so a
/// broken run can never pass as "no answers".
pub fn collect_answers(
    program: &Program,
    goal: &Goal,
    kind: EngineKind,
    options: &QueryOptions,
) -> Vec<Answer> {
    let mut source =
        run_query(program, goal, kind, options).unwrap_or_else(|e| panic!("{kind}: {e}"));
    let answers: Vec<Answer> = source.by_ref().collect();
    if let Some(fault) = source.failure() {
        panic!("{kind} engine faulted: {fault}");
    }
    answers
}

/// A comparison key that is exact on degrees (bit-level) and on bindings
/// (rendered text); sorting these keys turns an answer list into a
/// canonical multiset representation.
pub fn answer_key(answer: &Answer) -> (String, u64, u64) {
    let bindings = answer
        .bindings
        .iter()
        .map(|(name, term)| format!("{name}={term}"))
        .collect::<Vec<_>>()
        .join(",");
    (
        bindings,
        answer.degree.lower().to_bits(),
        answer.degree.upper().to_bits(),
    )
}

/// Sorted multiset view of an answer list.
pub fn answer_multiset(answers: &[Answer]) -> Vec<(String, u64, u64)> {
    let mut keys: Vec<_> = answers.iter().map(answer_key).collect();
    keys.sort();
    keys
}
