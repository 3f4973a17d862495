//! The `ivp` command line driver.
//!
//! ```text
//! ivp run <file> -q "<goal>" [--all] [--engine wam|sld|fixpoint]
//!                            [--lambda-cut "[l,u]"] [--depth-limit N]
//! ivp compile <file> [--dump-code]
//! ivp model <file>
//! ivp repl
//! ```
//!
//! `run` proves a goal and prints answers one per line (the first only,
//! unless `--all`); `compile` type-checks the program against the abstract
//! machine and optionally dumps its instruction listing; `model` prints the
//! least declarative model; `repl` starts the interactive shell.
//!
//! Exit status: 0 when at least one answer was found (or the subcommand
//! succeeded), 1 when a query produced no answers, 2 on any error. The
//! environment variable `IVP_DEPTH_BOUND` (default 3) bounds the term depth
//! of the ground universe used by `model` and the fixpoint engine.

use crate::engine::{run_query, EngineKind, QueryOptions};
use crate::interval::Interval;
use crate::semantics::{herbrand, least_model, render_model, DEFAULT_DEPTH_BOUND};
use crate::syntax::{parse_program, Program};
use crate::wam::{compile_with, disassemble};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "ivp",
    version,
    about = "Run interval-valued fuzzy logic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove a goal against a program and print its answers.
    Run {
        /// Program file.
        file: PathBuf,
        /// Goal to prove, e.g. "good_player(X)".
        #[arg(short, long)]
        query: String,
        /// Enumerate every answer instead of only the first.
        #[arg(long)]
        all: bool,
        /// Engine to use: wam, sld or fixpoint.
        #[arg(long, default_value_t = EngineKind::Wam)]
        engine: EngineKind,
        /// Lambda-cut override, e.g. "[0.5,0.5]" (defaults to the
        /// program's own directive).
        #[arg(long, value_name = "INTERVAL")]
        lambda_cut: Option<Interval>,
        /// Maximum derivation depth before a branch is abandoned.
        #[arg(long, value_name = "N")]
        depth_limit: Option<usize>,
    },
    /// Compile a program for the abstract machine.
    Compile {
        /// Program file.
        file: PathBuf,
        /// Print the instruction listing.
        #[arg(long)]
        dump_code: bool,
    },
    /// Print the least declarative model of a program.
    Model {
        /// Program file.
        file: PathBuf,
    },
    /// Start the interactive shell.
    Repl,
}

/// Parses `std::env::args` and runs the chosen subcommand, returning the
/// process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            query,
            all,
            engine,
            lambda_cut,
            depth_limit,
        } => run_command(&file, &query, all, engine, lambda_cut, depth_limit),
        Command::Compile { file, dump_code } => compile_command(&file, dump_code),
        Command::Model { file } => model_command(&file),
        Command::Repl => repl_command(),
    }
}

/// Reads and parses a program file, printing warnings to stderr.
/// Errors are printed as `file:line:col: message` diagnostics.
fn load_program(path: &Path) -> Result<Program, ()> {
    let name = path.display();
    let source = match std::fs::read_to_string(path) {
        Ok(source) => source,
        Err(e) => {
            eprintln!("error: {name}: {e}");
            return Err(());
        }
    };
    match parse_program(&source) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("{name}:{}:{}: warning: {}", w.line, w.col, w.message);
            }
            Ok(parsed.program)
        }
        Err(e) => {
            eprintln!("{name}:{e}");
            Err(())
        }
    }
}

fn depth_bound_from_env() -> usize {
    match std::env::var("IVP_DEPTH_BOUND") {
        Ok(text) => match text.parse() {
            Ok(bound) => bound,
            Err(_) => {
                eprintln!(
                    "warning: ignoring IVP_DEPTH_BOUND={text:?} (not a nonnegative integer); \
                     using {DEFAULT_DEPTH_BOUND}"
                );
                DEFAULT_DEPTH_BOUND
            }
        },
        Err(_) => DEFAULT_DEPTH_BOUND,
    }
}

fn run_command(
    file: &Path,
    query: &str,
    all: bool,
    engine: EngineKind,
    lambda_cut: Option<Interval>,
    depth_limit: Option<usize>,
) -> i32 {
    let Ok(program) = load_program(file) else {
        return 2;
    };
    let goal = match crate::syntax::parse_goal(query) {
        Ok(goal) => goal,
        Err(e) => {
            eprintln!("error in goal: {e}");
            return 2;
        }
    };
    if let Some(lambda) = lambda_cut {
        println!("% lambda-cut {lambda} (command-line override)");
    }
    let options = QueryOptions {
        lambda: lambda_cut,
        depth_limit,
        depth_bound: depth_bound_from_env(),
        ..QueryOptions::default()
    };
    let mut answers = match run_query(&program, &goal, engine, &options) {
        Ok(answers) => answers,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let mut count = 0usize;
    for answer in answers.by_ref() {
        println!("{answer}");
        count += 1;
        if !all {
            break;
        }
    }
    if let Some(fault) = answers.failure() {
        eprintln!("error: {fault}");
        return 2;
    }
    if count == 0 && answers.incomplete() {
        eprintln!("warning: search was cut off before exhausting alternatives");
    }
    if count > 0 {
        0
    } else {
        1
    }
}

fn compile_command(file: &Path, dump_code: bool) -> i32 {
    let Ok(program) = load_program(file) else {
        return 2;
    };
    let image = match compile_with(&program, true) {
        Ok(image) => image,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if dump_code {
        print!("{}", disassemble(&image));
    } else {
        println!(
            "compiled {} instructions in {} blocks",
            image.code.len(),
            image.blocks.len()
        );
    }
    0
}

fn model_command(file: &Path) -> i32 {
    let Ok(program) = load_program(file) else {
        return 2;
    };
    let depth_bound = depth_bound_from_env();
    let space = match herbrand(&program, depth_bound) {
        Ok(space) => space,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if space.truncated {
        eprintln!("warning: term universe truncated at depth {depth_bound}; model is partial");
    }
    match least_model(&program, &space) {
        Ok((model, iterations)) => {
            println!("fixpoint reached at iteration {iterations}");
            let rendered = render_model(&model, &space);
            if !rendered.is_empty() {
                println!("{rendered}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn repl_command() -> i32 {
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout();
    match crate::repl::Repl::new(depth_bound_from_env()).run(stdin.lock(), &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
